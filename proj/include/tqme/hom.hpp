#pragma once

#include <cstdint>
#include <vector>

#include "tqme/choi.hpp"
#include "tqme/linalg.hpp"

namespace tqme {

/// Which of the two interferometer inputs a mode belongs to. Rail A carries
/// photon a (standard module), rail B photon b (module under evaluation).
enum class Rail : std::uint8_t { A = 0, B = 1 };

/// Optical mode label for a d-dimensional module: one of 2d^2 modes,
/// flat index = rail*d^2 + path*d + time.
struct ModeIndex {
    Rail rail = Rail::A;
    std::size_t path = 0;
    std::size_t time = 0;

    static ModeIndex from_flat(std::size_t flat, std::size_t d);
    std::size_t flat(std::size_t d) const;
};

enum class EventClass : std::uint8_t { Bunching, AntiBunching };

/// 50:50 beamsplitter conventions. The interference network uses the
/// symmetric convention; the photon-pair source stage behaves like the
/// real (Hadamard-like) one. Bunching/anti-bunching masses of the module
/// evaluation pipeline are identical under either.
enum class BsConvention : std::uint8_t {
    Symmetric, // (1/sqrt2) [[1, i],[i, 1]]
    Real       // (1/sqrt2) [[1, 1],[1,-1]]
};

/// Unitary mode transformation c†_m -> sum_n T[n][m] c†_n.
class TransferMatrix {
public:
    /// Validates unitarity at 1e-10.
    explicit TransferMatrix(ComplexMatrix m);

    std::size_t modes() const { return matrix_.rows(); }
    const ComplexMatrix& matrix() const { return matrix_; }

private:
    ComplexMatrix matrix_;
};

/// Two-photon state |Psi> = sum_{jk} M_jk c†_j c†_k |0> with M symmetric and
/// sum_{j<k} |2 M_jk|^2 + sum_j 2 |M_jj|^2 = 1.
class TwoPhotonState {
public:
    /// Validates exact symmetry and normalization (1e-10).
    explicit TwoPhotonState(ComplexMatrix coefficients);

    std::size_t modes() const { return m_.rows(); }
    const ComplexMatrix& coefficients() const { return m_; }

private:
    ComplexMatrix m_;
};

/// Probabilities over unordered detector-mode pairs (j <= k), summing to 1.
struct OutcomeDistribution {
    struct Entry {
        std::size_t mode_j = 0; // flat indices, mode_j <= mode_k
        std::size_t mode_k = 0;
        double probability = 0.0;
    };
    std::size_t module_dim = 0;
    std::vector<Entry> entries;

    double total() const;
};

/// Single 2-mode splitter in the given convention.
TransferMatrix beamsplitter(BsConvention convention);

/// Pairwise splitter network over 2d^2 modes: one 50:50 beamsplitter between
/// (A, path, time) and (B, path, time) for every (path, time), identity
/// elsewhere.
TransferMatrix build_hom_network(std::size_t d,
                                 BsConvention convention = BsConvention::Symmetric);

/// Product input: photon a carries chi_a on rail A, photon b carries chi_b on
/// rail B. M = (a (x) b + b (x) a)/2 over the embedded amplitude vectors.
TwoPhotonState product_input(const ChoiState& chi_a, const ChoiState& chi_b);

/// Mode transformation of the two-photon state: M' = T M T^T (re-symmetrized
/// to keep M' = M'^T exact).
TwoPhotonState evolve(const TransferMatrix& t, const TwoPhotonState& s);

/// Ideal photon-number-resolving detection: P(j,k) = |2 M_jk|^2 for j < k,
/// P(j,j) = 2 |M_jj|^2.
OutcomeDistribution outcome_distribution(const TwoPhotonState& s);

/// Bunching iff both detected modes share a rail; detectors do not resolve
/// time bins.
EventClass classify(const ModeIndex& j, const ModeIndex& k);

/// Full event-level pipeline encode -> interfere -> detect, returning the
/// total bunching mass. Equals (1 + |Tr(W†V)/d|^2)/2 for unitary inputs.
double bunching_probability(const UnitaryMatrix& w, const UnitaryMatrix& v);

/// Bunching mass of an already-computed distribution.
double bunching_mass(const OutcomeDistribution& dist);

} // namespace tqme
