#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tqme/linalg.hpp"
#include "tqme/random.hpp"
#include "tqme/sampling.hpp"

namespace tqme {

/// Statevector over n qubits, qubit 0 least significant in the basis index.
class QubitState {
public:
    explicit QubitState(std::size_t n_qubits); // |0...0>
    QubitState(std::size_t n_qubits, std::vector<cdouble> amplitudes);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    const std::vector<cdouble>& amplitudes() const { return amplitudes_; }

    void apply_single(std::size_t qubit, const ComplexMatrix& u);
    void apply_cnot(std::size_t control, std::size_t target);
    /// k-qubit unitary; qubits[0] is the least significant bit of the local
    /// 2^k index.
    void apply_unitary(const std::vector<std::size_t>& qubits, const ComplexMatrix& u);

    double norm_sq() const;

private:
    std::size_t n_qubits_;
    std::vector<cdouble> amplitudes_;
};

enum class GateKind : std::uint8_t { H, Cnot, Rx, Ry, Unitary };

/// One circuit element. Rx/Ry follow the hardware convention
/// RX(theta) = exp(-i theta X / 2), RY(theta) = exp(-i theta Y / 2).
struct Gate {
    GateKind kind = GateKind::H;
    std::vector<std::size_t> qubits;
    double angle = 0.0;
    ComplexMatrix matrix; // Unitary gates only

    static Gate h(std::size_t q);
    static Gate cnot(std::size_t control, std::size_t target);
    static Gate rx(std::size_t q, double theta);
    static Gate ry(std::size_t q, double theta);
    static Gate unitary(std::vector<std::size_t> qubits, ComplexMatrix m);
};

/// Ordered gate list over a fixed-width register.
struct Circuit {
    std::size_t n_qubits = 0;
    std::vector<Gate> gates;

    void append(Gate g); // validates qubit indices and gate shape
};

/// 2x2 gate matrices for the rotation conventions above.
ComplexMatrix rx_matrix(double theta);
ComplexMatrix ry_matrix(double theta);

/// Measured bit strings from the top and bottom registers, most significant
/// qubit first. Equal lengths; position i in both strings refers to the same
/// SWAP-test pair.
struct ShotRecord {
    std::string bits_top;
    std::string bits_bottom;
};

/// Per-qubit classical readout-flip probabilities.
/// p01[q] = P(read 1 | true 0), p10[q] = P(read 0 | true 1), each < 0.5.
class ConfusionModel {
public:
    ConfusionModel(std::vector<double> p01, std::vector<double> p10);
    static ConfusionModel uniform(std::size_t n_qubits, double p01, double p10);

    std::size_t n_qubits() const { return p01_.size(); }
    double p01(std::size_t q) const { return p01_[q]; }
    double p10(std::size_t q) const { return p10_[q]; }

private:
    std::vector<double> p01_;
    std::vector<double> p10_;
};

/// (1/sqrt(2^n)) sum_i |i>|i> over 2n qubits: H on each of the first n
/// qubits, then a CNOT fan-out onto the paired qubit.
QubitState prepare_max_entangled(std::size_t n);

/// Applies the gates in order; preserves the norm.
QubitState run_circuit(const Circuit& c, QubitState s);

/// Full protocol circuit over 4n qubits: two entangled 2n-qubit registers,
/// W on the first n qubits of the top register, V on the first n of the
/// bottom, then the destructive SWAP test (CNOT top->bottom plus H on top,
/// pairing qubit i of each register).
Circuit tqme_qubit_circuit(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v);

/// Bitwise-AND the two strings; even popcount is a bunching event.
EventClass classify_shot(const ShotRecord& r);

/// Exact bunching probability, summing over all measurement strings.
/// Guarded at n <= 6 (2^{4n} amplitudes).
double exact_bunching(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v);

/// Inverse tensor-product confusion correction of a measured histogram:
/// negatives clipped to zero, total count preserved.
std::map<std::string, double> unfold_readout(const std::map<std::string, double>& counts,
                                             const ConfusionModel& c);

/// Samples the protocol circuit, optionally corrupts readout, optionally
/// unfolds, classifies, and maps the bunching rate to a gate fidelity via
/// F = (2^n (2P-1) + 1)/(2^n + 1). `counts_out`, when given, receives the
/// measured (post-noise, pre-unfolding) histogram.
FidelityEstimate run_protocol(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v,
                              std::uint64_t shots, RandomStream& rng,
                              const std::optional<ConfusionModel>& noise = std::nullopt,
                              bool mitigate = false, double confidence = 0.95,
                              std::map<std::string, std::uint64_t>* counts_out = nullptr);

/// Gate-list export: [{"gate": "h", "qubits": [0]}, ...]; rotation gates add
/// "angle", embedded unitaries add "matrix".
nlohmann::json circuit_to_json(const Circuit& c);

} // namespace tqme
