#include "tqme/choi.hpp"

#include <cmath>
#include <utility>

#include "tqme/errors.hpp"

namespace tqme {

ChoiState::ChoiState(std::size_t module_dim, PureState state)
    : d_(module_dim), state_(std::move(state)) {
    if (state_.dim() != d_ * d_) {
        throw DimensionError("Choi state must have dimension d^2");
    }
}

ChoiState encode_choi(const UnitaryMatrix& u) {
    const std::size_t d = u.dim();
    std::vector<cdouble> amps(d * d);
    double norm_sq = 0.0;
    for (std::size_t path = 0; path < d; ++path) {
        for (std::size_t time = 0; time < d; ++time) {
            amps[path * d + time] = u.at(path, time);
            norm_sq += std::norm(u.at(path, time));
        }
    }
    // For an exact unitary norm_sq == d; renormalizing keeps states built
    // from table data (unitary only to a few 1e-4) unit-norm.
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& a : amps) {
        a *= inv;
    }
    return ChoiState(d, PureState(std::move(amps)));
}

cdouble choi_overlap(const UnitaryMatrix& w, const UnitaryMatrix& v) {
    if (w.dim() != v.dim()) {
        throw DimensionError("choi_overlap dimension mismatch");
    }
    cdouble tr = 0.0;
    for (std::size_t r = 0; r < w.dim(); ++r) {
        for (std::size_t c = 0; c < w.dim(); ++c) {
            tr += std::conj(w.at(r, c)) * v.at(r, c);
        }
    }
    return tr / static_cast<double>(w.dim());
}

FidelityReport fidelity_chain(const UnitaryMatrix& w, const UnitaryMatrix& v) {
    FidelityReport report;
    report.d = w.dim();
    report.overlap = choi_overlap(w, v);
    report.f_choi = std::norm(report.overlap);
    report.p_bunch = (1.0 + report.f_choi) / 2.0;
    report.f_gate = (static_cast<double>(report.d) * report.f_choi + 1.0) /
                    (static_cast<double>(report.d) + 1.0);
    return report;
}

double fidelity_from_bunching(double p, std::size_t d) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw RangeError("bunching probability must lie in [0,1]");
    }
    if (d == 0) {
        throw DimensionError("module dimension must be >= 1");
    }
    const double dd = static_cast<double>(d);
    return (dd * (2.0 * p - 1.0) + 1.0) / (dd + 1.0);
}

UnitaryMatrix phase_family_a(double theta) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const cdouble phase = std::polar(1.0, theta);
    ComplexMatrix m(2, 2);
    m.at(0, 0) = inv_sqrt2;
    m.at(0, 1) = -phase * inv_sqrt2;
    m.at(1, 0) = inv_sqrt2;
    m.at(1, 1) = phase * inv_sqrt2;
    return UnitaryMatrix(std::move(m), kUnitaryTolGenerated);
}

UnitaryMatrix phase_family_column(const UnitaryMatrix& w, double theta, std::size_t column) {
    if (column >= w.dim()) {
        throw DimensionError("column index out of range");
    }
    const cdouble phase = std::polar(1.0, theta);
    ComplexMatrix m = w.matrix();
    for (std::size_t r = 0; r < w.dim(); ++r) {
        m.at(r, column) *= phase;
    }
    // A column phase preserves the input's unitarity deviation, so
    // 4-decimal table matrices remain valid; validate at the loose bound.
    return UnitaryMatrix(std::move(m), kUnitaryTolTable);
}

UnitaryMatrix hadamard2() {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    ComplexMatrix m(2, 2);
    m.at(0, 0) = inv_sqrt2;
    m.at(0, 1) = inv_sqrt2;
    m.at(1, 0) = inv_sqrt2;
    m.at(1, 1) = -inv_sqrt2;
    return UnitaryMatrix(std::move(m), kUnitaryTolGenerated);
}

} // namespace tqme
