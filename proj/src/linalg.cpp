#include "tqme/linalg.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "tqme/errors.hpp"

namespace tqme {

namespace {

using EigenMatrix =
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenMatrix to_eigen(const ComplexMatrix& m) {
    return Eigen::Map<const EigenMatrix>(m.entries().data(),
                                         static_cast<Eigen::Index>(m.rows()),
                                         static_cast<Eigen::Index>(m.cols()));
}

ComplexMatrix from_eigen(const EigenMatrix& e) {
    ComplexMatrix out(static_cast<std::size_t>(e.rows()),
                      static_cast<std::size_t>(e.cols()));
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
        for (Eigen::Index c = 0; c < e.cols(); ++c) {
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = e(r, c);
        }
    }
    return out;
}

void require_finite(const std::vector<cdouble>& entries) {
    for (const auto& z : entries) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw ValidationError("matrix/state entries must be finite");
        }
    }
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, cdouble(0.0, 0.0)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be >= 1");
    }
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cdouble> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be >= 1");
    }
    if (entries_.size() != rows * cols) {
        throw DimensionError("entry count does not match rows x cols");
    }
    require_finite(entries_);
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out.at(c, r) = std::conj(at(r, c));
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out.at(c, r) = at(r, c);
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    if (cols_ != rhs.rows_) {
        throw DimensionError("matrix product dimension mismatch");
    }
    ComplexMatrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const cdouble a = at(r, k);
            if (a == cdouble(0.0, 0.0)) {
                continue;
            }
            for (std::size_t c = 0; c < rhs.cols_; ++c) {
                out.at(r, c) += a * rhs.at(k, c);
            }
        }
    }
    return out;
}

cdouble ComplexMatrix::trace() const {
    if (rows_ != cols_) {
        throw DimensionError("trace of non-square matrix");
    }
    cdouble t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        t += at(i, i);
    }
    return t;
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw DimensionError("shape mismatch in max_abs_diff");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        worst = std::max(worst, std::abs(entries_[i] - other.entries_[i]));
    }
    return worst;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) {
        throw DimensionError("unitarity check requires a square matrix");
    }
    const ComplexMatrix gram = m.adjoint() * m;
    return gram.max_abs_diff(ComplexMatrix::identity(m.rows())) <= tol;
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m, double tol) : matrix_(std::move(m)) {
    if (!is_unitary(matrix_, tol)) {
        throw ValidationError("matrix is not unitary within tolerance");
    }
}

PureState::PureState(std::vector<cdouble> amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.empty()) {
        throw DimensionError("state dimension must be >= 1");
    }
    require_finite(amplitudes_);
    double norm_sq = 0.0;
    for (const auto& a : amplitudes_) {
        norm_sq += std::norm(a);
    }
    if (std::abs(norm_sq - 1.0) > 1e-10) {
        throw ValidationError("state is not unit-norm");
    }
}

cdouble inner_product(const PureState& psi, const PureState& phi) {
    if (psi.dim() != phi.dim()) {
        throw DimensionError("inner product dimension mismatch");
    }
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        acc += std::conj(psi[i]) * phi[i];
    }
    return acc;
}

UnitaryMatrix haar_random_unitary(std::size_t d, RandomStream& rng) {
    if (d == 0) {
        throw DimensionError("unitary dimension must be >= 1");
    }
    EigenMatrix gauss(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double re = rng.next_gaussian();
            const double im = rng.next_gaussian();
            gauss(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cdouble(re, im);
        }
    }
    Eigen::HouseholderQR<EigenMatrix> qr(gauss);
    EigenMatrix q = qr.householderQ();
    const EigenMatrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
    // Multiplying column j by phase(R_jj) removes the sign ambiguity of QR
    // and makes the distribution exactly Haar.
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const cdouble diag = r(j, j);
        const double mag = std::abs(diag);
        const cdouble phase = mag > 0.0 ? diag / mag : cdouble(1.0, 0.0);
        q.col(j) *= phase;
    }
    return UnitaryMatrix(from_eigen(q), kUnitaryTolGenerated);
}

UnitaryMatrix project_to_unitary(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("unitary projection requires a square matrix");
    }
    Eigen::JacobiSVD<EigenMatrix> svd(to_eigen(m), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const EigenMatrix polar = svd.matrixU() * svd.matrixV().adjoint();
    return UnitaryMatrix(from_eigen(polar), kUnitaryTolGenerated);
}

} // namespace tqme
