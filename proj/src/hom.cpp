#include "tqme/hom.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "tqme/errors.hpp"

namespace tqme {

namespace {

using EigenMatrix =
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double pair_norm_sq(const ComplexMatrix& m) {
    // sum_{j<k} |2 M_jk|^2 + sum_j 2 |M_jj|^2
    double total = 0.0;
    for (std::size_t j = 0; j < m.rows(); ++j) {
        total += 2.0 * std::norm(m.at(j, j));
        for (std::size_t k = j + 1; k < m.cols(); ++k) {
            total += std::norm(2.0 * m.at(j, k));
        }
    }
    return total;
}

} // namespace

ModeIndex ModeIndex::from_flat(std::size_t flat, std::size_t d) {
    ModeIndex idx;
    idx.rail = flat < d * d ? Rail::A : Rail::B;
    const std::size_t rest = flat % (d * d);
    idx.path = rest / d;
    idx.time = rest % d;
    return idx;
}

std::size_t ModeIndex::flat(std::size_t d) const {
    return static_cast<std::size_t>(rail) * d * d + path * d + time;
}

TransferMatrix::TransferMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    if (!is_unitary(matrix_, kUnitaryTolGenerated)) {
        throw ValidationError("transfer matrix must be unitary");
    }
}

TwoPhotonState::TwoPhotonState(ComplexMatrix coefficients) : m_(std::move(coefficients)) {
    if (m_.rows() != m_.cols()) {
        throw DimensionError("two-photon coefficient matrix must be square");
    }
    for (std::size_t j = 0; j < m_.rows(); ++j) {
        for (std::size_t k = j + 1; k < m_.cols(); ++k) {
            if (m_.at(j, k) != m_.at(k, j)) {
                throw ValidationError("two-photon coefficient matrix must be symmetric");
            }
        }
    }
    if (std::abs(pair_norm_sq(m_) - 1.0) > 1e-10) {
        throw ValidationError("two-photon state is not normalized");
    }
}

TransferMatrix beamsplitter(BsConvention convention) {
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix b(2, 2);
    if (convention == BsConvention::Symmetric) {
        b.at(0, 0) = s;
        b.at(0, 1) = cdouble(0.0, s);
        b.at(1, 0) = cdouble(0.0, s);
        b.at(1, 1) = s;
    } else {
        b.at(0, 0) = s;
        b.at(0, 1) = s;
        b.at(1, 0) = s;
        b.at(1, 1) = -s;
    }
    return TransferMatrix(std::move(b));
}

TransferMatrix build_hom_network(std::size_t d, BsConvention convention) {
    if (d == 0) {
        throw DimensionError("module dimension must be >= 1");
    }
    const std::size_t span = d * d;
    const ComplexMatrix b = beamsplitter(convention).matrix();
    ComplexMatrix t(2 * span, 2 * span);
    for (std::size_t m = 0; m < span; ++m) {
        t.at(m, m) = b.at(0, 0);
        t.at(m, span + m) = b.at(0, 1);
        t.at(span + m, m) = b.at(1, 0);
        t.at(span + m, span + m) = b.at(1, 1);
    }
    return TransferMatrix(std::move(t));
}

TwoPhotonState product_input(const ChoiState& chi_a, const ChoiState& chi_b) {
    if (chi_a.module_dim() != chi_b.module_dim()) {
        throw DimensionError("product input requires equal module dimensions");
    }
    const std::size_t d = chi_a.module_dim();
    const std::size_t span = d * d;
    const std::size_t modes = 2 * span;

    // Embedded amplitude vectors: a on rail A, b on rail B.
    std::vector<cdouble> a(modes, 0.0);
    std::vector<cdouble> b(modes, 0.0);
    for (std::size_t i = 0; i < span; ++i) {
        a[i] = chi_a.state()[i];
        b[span + i] = chi_b.state()[i];
    }

    ComplexMatrix m(modes, modes);
    for (std::size_t j = 0; j < modes; ++j) {
        for (std::size_t k = 0; k < modes; ++k) {
            m.at(j, k) = 0.5 * (a[j] * b[k] + b[j] * a[k]);
        }
    }
    return TwoPhotonState(std::move(m));
}

TwoPhotonState evolve(const TransferMatrix& t, const TwoPhotonState& s) {
    if (t.modes() != s.modes()) {
        throw DimensionError("evolve: mode counts do not match");
    }
    const auto n = static_cast<Eigen::Index>(t.modes());
    const Eigen::Map<const EigenMatrix> tm(t.matrix().entries().data(), n, n);
    const Eigen::Map<const EigenMatrix> sm(s.coefficients().entries().data(), n, n);
    EigenMatrix out = tm * sm * tm.transpose();
    // T M T^T is symmetric only up to rounding; restore exact symmetry.
    ComplexMatrix result(t.modes(), t.modes());
    for (Eigen::Index j = 0; j < n; ++j) {
        result.at(static_cast<std::size_t>(j), static_cast<std::size_t>(j)) = out(j, j);
        for (Eigen::Index k = j + 1; k < n; ++k) {
            const cdouble sym = 0.5 * (out(j, k) + out(k, j));
            result.at(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) = sym;
            result.at(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) = sym;
        }
    }
    return TwoPhotonState(std::move(result));
}

OutcomeDistribution outcome_distribution(const TwoPhotonState& s) {
    // TwoPhotonState is normalized by construction, which is exactly the
    // statement that these probabilities sum to 1.
    const std::size_t modes = s.modes();
    const std::size_t d_sq = modes / 2;
    OutcomeDistribution dist;
    dist.module_dim = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d_sq))));
    dist.entries.reserve(modes * (modes + 1) / 2);
    for (std::size_t j = 0; j < modes; ++j) {
        dist.entries.push_back({j, j, 2.0 * std::norm(s.coefficients().at(j, j))});
        for (std::size_t k = j + 1; k < modes; ++k) {
            dist.entries.push_back({j, k, std::norm(2.0 * s.coefficients().at(j, k))});
        }
    }
    return dist;
}

double OutcomeDistribution::total() const {
    double sum = 0.0;
    for (const auto& e : entries) {
        sum += e.probability;
    }
    return sum;
}

EventClass classify(const ModeIndex& j, const ModeIndex& k) {
    return j.rail == k.rail ? EventClass::Bunching : EventClass::AntiBunching;
}

double bunching_mass(const OutcomeDistribution& dist) {
    const std::size_t d = dist.module_dim;
    double mass = 0.0;
    for (const auto& e : dist.entries) {
        if (classify(ModeIndex::from_flat(e.mode_j, d), ModeIndex::from_flat(e.mode_k, d)) ==
            EventClass::Bunching) {
            mass += e.probability;
        }
    }
    return mass;
}

double bunching_probability(const UnitaryMatrix& w, const UnitaryMatrix& v) {
    if (w.dim() != v.dim()) {
        throw DimensionError("bunching_probability dimension mismatch");
    }
    const TransferMatrix network = build_hom_network(w.dim());
    const TwoPhotonState input = product_input(encode_choi(w), encode_choi(v));
    const TwoPhotonState output = evolve(network, input);
    return bunching_mass(outcome_distribution(output));
}

} // namespace tqme
