#pragma once

#include "tqme/linalg.hpp"

namespace tqme {

/// Single-photon Choi state of a d x d module: a path (x) time-bin state of
/// dimension d^2 whose amplitude at index path*d + time is U[path][time]/sqrt(d).
class ChoiState {
public:
    ChoiState(std::size_t module_dim, PureState state);

    std::size_t module_dim() const { return d_; }
    const PureState& state() const { return state_; }

    /// Amplitude of |path>^p |time>^t.
    const cdouble& amplitude(std::size_t path, std::size_t time) const {
        return state_[path * d_ + time];
    }

private:
    std::size_t d_;
    PureState state_;
};

/// Closed-form fidelity chain between a standard module W and a module under
/// evaluation V:
///   overlap  = Tr(W†V)/d
///   f_choi   = |overlap|^2
///   p_bunch  = (1 + f_choi)/2
///   f_gate   = (d * f_choi + 1)/(d + 1)
struct FidelityReport {
    cdouble overlap;
    double f_choi = 0.0;
    double p_bunch = 0.0;
    double f_gate = 0.0;
    std::size_t d = 0;
};

/// Maps a module unitary onto its Choi state: amplitude(path j, time i)
/// = U[j][i]/sqrt(d). The result is renormalized, so matrices that are
/// unitary only within a loose tolerance still produce a valid state.
ChoiState encode_choi(const UnitaryMatrix& u);

/// alpha = <chi_W|chi_V> = Tr(W†V)/d.
cdouble choi_overlap(const UnitaryMatrix& w, const UnitaryMatrix& v);

FidelityReport fidelity_chain(const UnitaryMatrix& w, const UnitaryMatrix& v);

/// Gate fidelity from a bunching probability: (d(2P-1)+1)/(d+1).
/// P must lie in [0,1]; d >= 1.
double fidelity_from_bunching(double p, std::size_t d);

/// theta-parametrized family (1/sqrt2)[[1, -e^{i theta}],[1, e^{i theta}]];
/// coincides with the Hadamard gate at theta = pi.
UnitaryMatrix phase_family_a(double theta);

/// W with one column multiplied by e^{i theta}; overlap with W is
/// (d - 1 + e^{i theta})/d.
UnitaryMatrix phase_family_column(const UnitaryMatrix& w, double theta, std::size_t column);

/// The 2x2 Hadamard gate.
UnitaryMatrix hadamard2();

} // namespace tqme
