#include "tqme/qubit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

#include "tqme/errors.hpp"

namespace tqme {

namespace {

constexpr std::size_t kMaxProtocolN = 6;   // 4n = 24 qubits, 16M amplitudes
constexpr std::size_t kMaxUnfoldBits = 24;

std::size_t bits_to_index(const std::string& bits) {
    std::size_t idx = 0;
    for (char ch : bits) {
        if (ch != '0' && ch != '1') {
            throw ValidationError("bit strings may contain only '0'/'1'");
        }
        idx = (idx << 1) | static_cast<std::size_t>(ch == '1');
    }
    return idx;
}

std::string index_to_bits(std::size_t idx, std::size_t width) {
    std::string out(width, '0');
    for (std::size_t q = 0; q < width; ++q) {
        if (idx & (std::size_t{1} << q)) {
            out[width - 1 - q] = '1';
        }
    }
    return out;
}

bool even_and_parity(std::size_t top_bits, std::size_t bottom_bits) {
    return (std::popcount(top_bits & bottom_bits) & 1u) == 0;
}

} // namespace

QubitState::QubitState(std::size_t n_qubits)
    : n_qubits_(n_qubits), amplitudes_(std::size_t{1} << n_qubits, cdouble(0.0, 0.0)) {
    if (n_qubits == 0) {
        throw DimensionError("qubit register must hold at least one qubit");
    }
    amplitudes_[0] = 1.0;
}

QubitState::QubitState(std::size_t n_qubits, std::vector<cdouble> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits == 0 || amplitudes_.size() != (std::size_t{1} << n_qubits)) {
        throw DimensionError("amplitude vector must have length 2^n_qubits");
    }
    if (std::abs(norm_sq() - 1.0) > 1e-10) {
        throw ValidationError("qubit state is not unit-norm");
    }
}

double QubitState::norm_sq() const {
    double acc = 0.0;
    for (const auto& a : amplitudes_) {
        acc += std::norm(a);
    }
    return acc;
}

void QubitState::apply_single(std::size_t qubit, const ComplexMatrix& u) {
    if (qubit >= n_qubits_) {
        throw CircuitError("qubit index out of range");
    }
    if (u.rows() != 2 || u.cols() != 2) {
        throw CircuitError("single-qubit gate must be 2x2");
    }
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = 0; base < amplitudes_.size(); base += 2 * stride) {
        for (std::size_t offset = 0; offset < stride; ++offset) {
            const std::size_t i0 = base + offset;
            const std::size_t i1 = i0 + stride;
            const cdouble a0 = amplitudes_[i0];
            const cdouble a1 = amplitudes_[i1];
            amplitudes_[i0] = u.at(0, 0) * a0 + u.at(0, 1) * a1;
            amplitudes_[i1] = u.at(1, 0) * a0 + u.at(1, 1) * a1;
        }
    }
}

void QubitState::apply_cnot(std::size_t control, std::size_t target) {
    if (control >= n_qubits_ || target >= n_qubits_ || control == target) {
        throw CircuitError("invalid CNOT qubit indices");
    }
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) {
            std::swap(amplitudes_[i], amplitudes_[i | tbit]);
        }
    }
}

void QubitState::apply_unitary(const std::vector<std::size_t>& qubits, const ComplexMatrix& u) {
    const std::size_t k = qubits.size();
    const std::size_t local_dim = std::size_t{1} << k;
    if (u.rows() != local_dim || u.cols() != local_dim) {
        throw CircuitError("gate matrix dimension does not match qubit count");
    }
    std::size_t mask = 0;
    for (std::size_t q : qubits) {
        if (q >= n_qubits_) {
            throw CircuitError("qubit index out of range");
        }
        if (mask & (std::size_t{1} << q)) {
            throw CircuitError("duplicate qubit in gate");
        }
        mask |= std::size_t{1} << q;
    }
    std::vector<cdouble> local(local_dim);
    for (std::size_t base = 0; base < amplitudes_.size(); ++base) {
        if (base & mask) {
            continue; // visit each coset once, at its all-zeros representative
        }
        for (std::size_t v = 0; v < local_dim; ++v) {
            std::size_t idx = base;
            for (std::size_t b = 0; b < k; ++b) {
                if (v & (std::size_t{1} << b)) {
                    idx |= std::size_t{1} << qubits[b];
                }
            }
            local[v] = amplitudes_[idx];
        }
        for (std::size_t r = 0; r < local_dim; ++r) {
            cdouble acc = 0.0;
            for (std::size_t c = 0; c < local_dim; ++c) {
                acc += u.at(r, c) * local[c];
            }
            std::size_t idx = base;
            for (std::size_t b = 0; b < k; ++b) {
                if (r & (std::size_t{1} << b)) {
                    idx |= std::size_t{1} << qubits[b];
                }
            }
            amplitudes_[idx] = acc;
        }
    }
}

Gate Gate::h(std::size_t q) {
    Gate g;
    g.kind = GateKind::H;
    g.qubits = {q};
    return g;
}

Gate Gate::cnot(std::size_t control, std::size_t target) {
    Gate g;
    g.kind = GateKind::Cnot;
    g.qubits = {control, target};
    return g;
}

Gate Gate::rx(std::size_t q, double theta) {
    Gate g;
    g.kind = GateKind::Rx;
    g.qubits = {q};
    g.angle = theta;
    return g;
}

Gate Gate::ry(std::size_t q, double theta) {
    Gate g;
    g.kind = GateKind::Ry;
    g.qubits = {q};
    g.angle = theta;
    return g;
}

Gate Gate::unitary(std::vector<std::size_t> qubits, ComplexMatrix m) {
    Gate g;
    g.kind = GateKind::Unitary;
    g.qubits = std::move(qubits);
    g.matrix = std::move(m);
    return g;
}

void Circuit::append(Gate g) {
    for (std::size_t q : g.qubits) {
        if (q >= n_qubits) {
            throw CircuitError("gate addresses a qubit outside the register");
        }
    }
    if (!std::isfinite(g.angle)) {
        throw CircuitError("gate angle must be finite");
    }
    if (g.kind == GateKind::Unitary &&
        g.matrix.rows() != (std::size_t{1} << g.qubits.size())) {
        throw CircuitError("gate matrix dimension does not match qubit count");
    }
    gates.push_back(std::move(g));
}

ComplexMatrix rx_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    ComplexMatrix m(2, 2);
    m.at(0, 0) = c;
    m.at(0, 1) = cdouble(0.0, -s);
    m.at(1, 0) = cdouble(0.0, -s);
    m.at(1, 1) = c;
    return m;
}

ComplexMatrix ry_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    ComplexMatrix m(2, 2);
    m.at(0, 0) = c;
    m.at(0, 1) = -s;
    m.at(1, 0) = s;
    m.at(1, 1) = c;
    return m;
}

ConfusionModel::ConfusionModel(std::vector<double> p01, std::vector<double> p10)
    : p01_(std::move(p01)), p10_(std::move(p10)) {
    if (p01_.size() != p10_.size() || p01_.empty()) {
        throw ValidationError("confusion model needs matching per-qubit p01/p10");
    }
    for (std::size_t q = 0; q < p01_.size(); ++q) {
        if (!(p01_[q] >= 0.0 && p01_[q] < 0.5) || !(p10_[q] >= 0.0 && p10_[q] < 0.5)) {
            throw RangeError("readout-flip probabilities must lie in [0, 0.5)");
        }
    }
}

ConfusionModel ConfusionModel::uniform(std::size_t n_qubits, double p01, double p10) {
    return ConfusionModel(std::vector<double>(n_qubits, p01),
                          std::vector<double>(n_qubits, p10));
}

QubitState prepare_max_entangled(std::size_t n) {
    if (n == 0) {
        throw DimensionError("register half-width must be >= 1");
    }
    QubitState s(2 * n);
    const ComplexMatrix h = hadamard2().matrix();
    for (std::size_t q = 0; q < n; ++q) {
        s.apply_single(q, h);
    }
    for (std::size_t q = 0; q < n; ++q) {
        s.apply_cnot(q, q + n);
    }
    return s;
}

QubitState run_circuit(const Circuit& c, QubitState s) {
    if (s.n_qubits() != c.n_qubits) {
        throw CircuitError("circuit width does not match state width");
    }
    static const ComplexMatrix h = hadamard2().matrix();
    for (const auto& g : c.gates) {
        switch (g.kind) {
        case GateKind::H:
            s.apply_single(g.qubits[0], h);
            break;
        case GateKind::Cnot:
            s.apply_cnot(g.qubits[0], g.qubits[1]);
            break;
        case GateKind::Rx:
            s.apply_single(g.qubits[0], rx_matrix(g.angle));
            break;
        case GateKind::Ry:
            s.apply_single(g.qubits[0], ry_matrix(g.angle));
            break;
        case GateKind::Unitary:
            s.apply_unitary(g.qubits, g.matrix);
            break;
        }
    }
    return s;
}

Circuit tqme_qubit_circuit(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v) {
    if (n == 0) {
        throw DimensionError("register half-width must be >= 1");
    }
    const std::size_t module_dim = std::size_t{1} << n;
    if (w.dim() != module_dim || v.dim() != module_dim) {
        throw CircuitError("module unitaries must act on n qubits (dim 2^n)");
    }
    Circuit c;
    c.n_qubits = 4 * n;
    const std::size_t bottom = 2 * n;

    // Entangled register preparation, top then bottom.
    for (std::size_t q = 0; q < n; ++q) {
        c.append(Gate::h(q));
    }
    for (std::size_t q = 0; q < n; ++q) {
        c.append(Gate::cnot(q, q + n));
    }
    for (std::size_t q = 0; q < n; ++q) {
        c.append(Gate::h(bottom + q));
    }
    for (std::size_t q = 0; q < n; ++q) {
        c.append(Gate::cnot(bottom + q, bottom + q + n));
    }

    // Module information extraction.
    std::vector<std::size_t> top_module(n);
    std::vector<std::size_t> bottom_module(n);
    for (std::size_t q = 0; q < n; ++q) {
        top_module[q] = q;
        bottom_module[q] = bottom + q;
    }
    c.append(Gate::unitary(top_module, w.matrix()));
    c.append(Gate::unitary(bottom_module, v.matrix()));

    // Destructive SWAP test: qubit i of the top register pairs with qubit i
    // of the bottom register.
    for (std::size_t i = 0; i < 2 * n; ++i) {
        c.append(Gate::cnot(i, bottom + i));
        c.append(Gate::h(i));
    }
    return c;
}

EventClass classify_shot(const ShotRecord& r) {
    if (r.bits_top.size() != r.bits_bottom.size()) {
        throw ValidationError("shot record bit strings must have equal length");
    }
    const std::size_t top = bits_to_index(r.bits_top);
    const std::size_t bottom = bits_to_index(r.bits_bottom);
    return even_and_parity(top, bottom) ? EventClass::Bunching : EventClass::AntiBunching;
}

double exact_bunching(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v) {
    if (n > kMaxProtocolN) {
        throw ResourceError("protocol limited to n <= 6 (2^{4n} amplitudes)");
    }
    const Circuit c = tqme_qubit_circuit(n, w, v);
    const QubitState final_state = run_circuit(c, QubitState(c.n_qubits));
    const std::size_t reg_bits = 2 * n;
    const std::size_t reg_mask = (std::size_t{1} << reg_bits) - 1;
    double p_bunch = 0.0;
    for (std::size_t idx = 0; idx < final_state.dim(); ++idx) {
        const std::size_t top = idx & reg_mask;
        const std::size_t bottom = (idx >> reg_bits) & reg_mask;
        if (even_and_parity(top, bottom)) {
            p_bunch += std::norm(final_state.amplitudes()[idx]);
        }
    }
    return p_bunch;
}

std::map<std::string, double> unfold_readout(const std::map<std::string, double>& counts,
                                             const ConfusionModel& c) {
    if (counts.empty()) {
        throw ValidationError("cannot unfold an empty histogram");
    }
    const std::size_t width = counts.begin()->first.size();
    if (width == 0 || width > kMaxUnfoldBits) {
        throw ResourceError("unfolding supports 1..24 bit positions");
    }
    if (c.n_qubits() < width) {
        throw ValidationError("confusion model has fewer qubits than the histogram");
    }

    std::vector<double> dense(std::size_t{1} << width, 0.0);
    double total = 0.0;
    for (const auto& [bits, value] : counts) {
        if (bits.size() != width) {
            throw ValidationError("histogram bit strings must share one length");
        }
        if (value < 0.0) {
            throw ValidationError("histogram counts must be non-negative");
        }
        dense[bits_to_index(bits)] += value;
        total += value;
    }

    // Per-qubit inverse of C_q = [[1-p01, p10], [p01, 1-p10]], applied as a
    // tensor-product butterfly.
    for (std::size_t q = 0; q < width; ++q) {
        const double p01 = c.p01(q);
        const double p10 = c.p10(q);
        const double det = 1.0 - p01 - p10;
        if (det <= 0.0) {
            throw MitigationError("confusion matrix is singular");
        }
        const double inv00 = (1.0 - p10) / det;
        const double inv01 = -p10 / det;
        const double inv10 = -p01 / det;
        const double inv11 = (1.0 - p01) / det;
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < dense.size(); base += 2 * stride) {
            for (std::size_t offset = 0; offset < stride; ++offset) {
                const std::size_t i0 = base + offset;
                const std::size_t i1 = i0 + stride;
                const double v0 = dense[i0];
                const double v1 = dense[i1];
                dense[i0] = inv00 * v0 + inv01 * v1;
                dense[i1] = inv10 * v0 + inv11 * v1;
            }
        }
    }

    double positive_total = 0.0;
    for (auto& v : dense) {
        v = std::max(0.0, v);
        positive_total += v;
    }
    const double scale = positive_total > 0.0 ? total / positive_total : 0.0;

    std::map<std::string, double> out;
    for (std::size_t idx = 0; idx < dense.size(); ++idx) {
        if (dense[idx] > 0.0) {
            out[index_to_bits(idx, width)] = dense[idx] * scale;
        }
    }
    return out;
}

FidelityEstimate run_protocol(std::size_t n, const UnitaryMatrix& w, const UnitaryMatrix& v,
                              std::uint64_t shots, RandomStream& rng,
                              const std::optional<ConfusionModel>& noise, bool mitigate,
                              double confidence,
                              std::map<std::string, std::uint64_t>* counts_out) {
    if (shots == 0) {
        throw RangeError("shots must be >= 1");
    }
    if (n > kMaxProtocolN) {
        throw ResourceError("protocol limited to n <= 6 (2^{4n} amplitudes)");
    }
    const Circuit c = tqme_qubit_circuit(n, w, v);
    const QubitState final_state = run_circuit(c, QubitState(c.n_qubits));
    const std::size_t total_bits = c.n_qubits;
    if (noise && noise->n_qubits() < total_bits) {
        throw ValidationError("confusion model has fewer qubits than the register");
    }

    std::vector<double> cumulative(final_state.dim());
    double acc = 0.0;
    for (std::size_t idx = 0; idx < final_state.dim(); ++idx) {
        acc += std::norm(final_state.amplitudes()[idx]);
        cumulative[idx] = acc;
    }

    const std::size_t reg_bits = 2 * n;
    const std::size_t reg_mask = (std::size_t{1} << reg_bits) - 1;
    std::map<std::size_t, std::uint64_t> histogram;
    EventTally tally;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.next_double() * acc;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        if (noise) {
            for (std::size_t q = 0; q < total_bits; ++q) {
                const bool bit = (idx >> q) & 1u;
                const double flip_p = bit ? noise->p10(q) : noise->p01(q);
                if (rng.next_double() < flip_p) {
                    idx ^= std::size_t{1} << q;
                }
            }
        }
        if (mitigate || counts_out != nullptr) {
            ++histogram[idx];
        }
        const std::size_t top = idx & reg_mask;
        const std::size_t bottom = (idx >> reg_bits) & reg_mask;
        if (even_and_parity(top, bottom)) {
            ++tally.n_bunch;
        } else {
            ++tally.n_anti;
        }
    }

    if (counts_out != nullptr) {
        counts_out->clear();
        for (const auto& [idx, count] : histogram) {
            (*counts_out)[index_to_bits(idx, total_bits)] = count;
        }
    }

    const std::size_t module_dim = std::size_t{1} << n;
    if (!mitigate) {
        return estimate_fidelity(tally, module_dim, confidence);
    }

    std::map<std::string, double> measured;
    for (const auto& [idx, count] : histogram) {
        measured[index_to_bits(idx, total_bits)] = static_cast<double>(count);
    }
    const auto model =
        noise.value_or(ConfusionModel::uniform(total_bits, 0.0, 0.0));
    const auto unfolded = unfold_readout(measured, model);
    double bunch_weight = 0.0;
    double total_weight = 0.0;
    for (const auto& [bits, value] : unfolded) {
        const std::size_t idx = bits_to_index(bits);
        const std::size_t top = idx & reg_mask;
        const std::size_t bottom = (idx >> reg_bits) & reg_mask;
        if (even_and_parity(top, bottom)) {
            bunch_weight += value;
        }
        total_weight += value;
    }
    const double p_hat = total_weight > 0.0 ? bunch_weight / total_weight : 0.0;
    return estimate_from_proportion(p_hat, shots, module_dim, confidence);
}

nlohmann::json circuit_to_json(const Circuit& c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : c.gates) {
        nlohmann::json item;
        switch (g.kind) {
        case GateKind::H:
            item["gate"] = "h";
            break;
        case GateKind::Cnot:
            item["gate"] = "cnot";
            break;
        case GateKind::Rx:
            item["gate"] = "rx";
            item["angle"] = g.angle;
            break;
        case GateKind::Ry:
            item["gate"] = "ry";
            item["angle"] = g.angle;
            break;
        case GateKind::Unitary: {
            item["gate"] = "unitary";
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t r = 0; r < g.matrix.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t col = 0; col < g.matrix.cols(); ++col) {
                    row.push_back({g.matrix.at(r, col).real(), g.matrix.at(r, col).imag()});
                }
                rows.push_back(std::move(row));
            }
            item["matrix"] = std::move(rows);
            break;
        }
        }
        item["qubits"] = g.qubits;
        gates.push_back(std::move(item));
    }
    return {{"n_qubits", c.n_qubits}, {"gates", std::move(gates)}};
}

} // namespace tqme
