#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "tqme/random.hpp"

namespace tqme {

using cdouble = std::complex<double>;

/// Unitarity tolerance for matrices produced by this library.
inline constexpr double kUnitaryTolGenerated = 1e-10;
/// Unitarity tolerance for matrices printed to four decimals.
inline constexpr double kUnitaryTolTable = 5e-3;

/// Dense complex matrix, row-major. Entries must stay finite.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cdouble> entries);

    static ComplexMatrix identity(std::size_t dim);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cdouble& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const cdouble& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    const std::vector<cdouble>& entries() const { return entries_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix operator*(const ComplexMatrix& rhs) const;

    cdouble trace() const;

    /// max_ij |A_ij - B_ij|
    double max_abs_diff(const ComplexMatrix& other) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cdouble> entries_;
};

/// true iff M is square and ||M†M - I||_max <= tol. Throws DimensionError
/// on non-square input.
bool is_unitary(const ComplexMatrix& m, double tol);

/// Square matrix validated as unitary at construction time.
class UnitaryMatrix {
public:
    /// Validates ||U†U - I||_max <= tol; throws ValidationError otherwise.
    explicit UnitaryMatrix(ComplexMatrix m, double tol = kUnitaryTolGenerated);

    std::size_t dim() const { return matrix_.rows(); }
    const ComplexMatrix& matrix() const { return matrix_; }
    const cdouble& at(std::size_t r, std::size_t c) const { return matrix_.at(r, c); }

private:
    ComplexMatrix matrix_;
};

/// Unit-norm complex amplitude vector.
class PureState {
public:
    /// Validates | ||psi||^2 - 1 | <= 1e-10; throws ValidationError otherwise.
    explicit PureState(std::vector<cdouble> amplitudes);

    std::size_t dim() const { return amplitudes_.size(); }
    const std::vector<cdouble>& amplitudes() const { return amplitudes_; }
    const cdouble& operator[](std::size_t i) const { return amplitudes_[i]; }

private:
    std::vector<cdouble> amplitudes_;
};

/// <psi|phi>, conjugate-linear in the first argument.
cdouble inner_product(const PureState& psi, const PureState& phi);

/// Haar-distributed d x d unitary: QR of a complex standard-Gaussian matrix
/// with the R-diagonal phase correction.
UnitaryMatrix haar_random_unitary(std::size_t d, RandomStream& rng);

/// Nearest unitary in Frobenius norm (polar decomposition via SVD).
UnitaryMatrix project_to_unitary(const ComplexMatrix& m);

} // namespace tqme
