#include <doctest.h>

#include <cmath>
#include <bit>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "test_helpers.hpp"
#include "tqme/choi.hpp"
#include "tqme/errors.hpp"
#include "tqme/qubit.hpp"
#include "tqme/random.hpp"

using namespace tqme;
using tqme_test::identity_u;
using tqme_test::pauli_x;
using tqme_test::pauli_z;
using tqme_test::trace_fidelity;

namespace {

constexpr double kPi = std::numbers::pi;

// Matrix exponential of a 2x2 generator by plain Taylor summation; an
// independent oracle for the rotation-gate conventions.
ComplexMatrix expm2(const ComplexMatrix& a) {
    ComplexMatrix result = ComplexMatrix::identity(2);
    ComplexMatrix term = ComplexMatrix::identity(2);
    for (int k = 1; k < 40; ++k) {
        term = term * a;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                term.at(i, j) /= static_cast<double>(k);
                result.at(i, j) += term.at(i, j);
            }
        }
    }
    return result;
}

ComplexMatrix rotation_generator(double theta, bool is_x) {
    ComplexMatrix a(2, 2);
    if (is_x) {
        a.at(0, 1) = cdouble(0.0, -theta / 2.0);
        a.at(1, 0) = cdouble(0.0, -theta / 2.0);
    } else {
        a.at(0, 1) = cdouble(0.0, -theta / 2.0) * cdouble(0.0, -1.0);
        a.at(1, 0) = cdouble(0.0, -theta / 2.0) * cdouble(0.0, 1.0);
    }
    return a;
}

UnitaryMatrix random_rx_ry(RandomStream& rng) {
    const double a = 2.0 * kPi * rng.next_double();
    const double b = 2.0 * kPi * rng.next_double();
    return UnitaryMatrix(rx_matrix(a) * ry_matrix(b));
}

double protocol_sigma(double p_true, std::size_t d, std::uint64_t shots) {
    const double dd = static_cast<double>(d);
    return (2.0 * dd / (dd + 1.0)) * std::sqrt(p_true * (1.0 - p_true) / static_cast<double>(shots));
}

} // namespace

TEST_SUITE_BEGIN("qubit");

TEST_CASE("prepare_max_entangled builds the Bell state for n = 1") {
    const QubitState s = prepare_max_entangled(1);
    const double v = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(s.amplitudes()[0] - cdouble(v, 0.0)) <= 1e-12);
    CHECK(std::abs(s.amplitudes()[1]) <= 1e-12);
    CHECK(std::abs(s.amplitudes()[2]) <= 1e-12);
    CHECK(std::abs(s.amplitudes()[3] - cdouble(v, 0.0)) <= 1e-12);
}

TEST_CASE("prepare_max_entangled spreads equally over paired indices") {
    const QubitState s = prepare_max_entangled(2);
    for (std::size_t idx = 0; idx < 16; ++idx) {
        const bool paired = (idx & 3u) == (idx >> 2);
        if (paired) {
            CHECK(std::abs(s.amplitudes()[idx] - cdouble(0.5, 0.0)) <= 1e-12);
        } else {
            CHECK(std::abs(s.amplitudes()[idx]) <= 1e-12);
        }
    }
    CHECK(std::abs(prepare_max_entangled(3).norm_sq() - 1.0) <= 1e-12);
    CHECK_THROWS_AS(prepare_max_entangled(0), DimensionError);
}

TEST_CASE("H is an involution under run_circuit") {
    Circuit c;
    c.n_qubits = 1;
    c.append(Gate::h(0));
    c.append(Gate::h(0));
    const QubitState out = run_circuit(c, QubitState(1));
    CHECK(std::abs(out.amplitudes()[0] - cdouble(1.0, 0.0)) <= 1e-12);
    CHECK(std::abs(out.amplitudes()[1]) <= 1e-12);
}

TEST_CASE("rotation gates match the matrix-exponential oracle") {
    for (const double theta : {0.3, 1.1, kPi, 4.9}) {
        const ComplexMatrix rx_oracle = expm2(rotation_generator(theta, true));
        CHECK(rx_matrix(theta).max_abs_diff(rx_oracle) <= 1e-12);
        const ComplexMatrix ry_oracle = expm2(rotation_generator(theta, false));
        CHECK(ry_matrix(theta).max_abs_diff(ry_oracle) <= 1e-12);
    }
    // RX(pi)|0> = -i|1>
    Circuit c;
    c.n_qubits = 1;
    c.append(Gate::rx(0, kPi));
    const QubitState out = run_circuit(c, QubitState(1));
    CHECK(std::abs(out.amplitudes()[0]) <= 1e-12);
    CHECK(std::abs(out.amplitudes()[1] - cdouble(0.0, -1.0)) <= 1e-12);
}

TEST_CASE("CNOT completes the Bell pair") {
    Circuit c;
    c.n_qubits = 2;
    c.append(Gate::h(0));
    c.append(Gate::cnot(0, 1));
    const QubitState out = run_circuit(c, QubitState(2));
    const double v = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(out.amplitudes()[0] - cdouble(v, 0.0)) <= 1e-12);
    CHECK(std::abs(out.amplitudes()[3] - cdouble(v, 0.0)) <= 1e-12);
}

TEST_CASE("circuits preserve the norm") {
    RandomStream rng(71);
    Circuit c;
    c.n_qubits = 3;
    for (int i = 0; i < 30; ++i) {
        const auto pick = rng.next_u64() % 4;
        const std::size_t q = rng.next_u64() % 3;
        if (pick == 0) {
            c.append(Gate::h(q));
        } else if (pick == 1) {
            c.append(Gate::rx(q, 2.0 * kPi * rng.next_double()));
        } else if (pick == 2) {
            c.append(Gate::ry(q, 2.0 * kPi * rng.next_double()));
        } else {
            c.append(Gate::cnot(q, (q + 1) % 3));
        }
    }
    const QubitState out = run_circuit(c, QubitState(3));
    CHECK(std::abs(out.norm_sq() - 1.0) <= 1e-10);
}

TEST_CASE("circuit validation rejects bad indices and shapes") {
    Circuit c;
    c.n_qubits = 2;
    CHECK_THROWS_AS(c.append(Gate::h(2)), CircuitError);
    CHECK_THROWS_AS(c.append(Gate::unitary({0, 1}, ComplexMatrix::identity(2))), CircuitError);
    RandomStream rng(5);
    CHECK_THROWS_AS(tqme_qubit_circuit(1, haar_random_unitary(4, rng),
                                       haar_random_unitary(4, rng)),
                    CircuitError);
}

TEST_CASE("protocol circuit has the four-qubit layout for n = 1") {
    const Circuit c = tqme_qubit_circuit(1, identity_u(2), identity_u(2));
    CHECK(c.n_qubits == 4);
    // 2x (H + CNOT) preparation, 2 module gates, 2x (CNOT + H) swap test
    CHECK(c.gates.size() == 10);
    CHECK(c.gates[0].kind == GateKind::H);
    CHECK(c.gates[4].kind == GateKind::Unitary);
    CHECK(c.gates[5].kind == GateKind::Unitary);
    CHECK(c.gates.back().kind == GateKind::H);
}

TEST_CASE("classify_shot follows the AND-parity rule") {
    CHECK(classify_shot({"00", "00"}) == EventClass::Bunching);
    CHECK(classify_shot({"11", "01"}) == EventClass::AntiBunching);
    CHECK(classify_shot({"11", "11"}) == EventClass::Bunching);
    CHECK_THROWS_AS(classify_shot({"11", "0"}), ValidationError);
    CHECK_THROWS_AS(classify_shot({"1x", "01"}), ValidationError);
}

TEST_CASE("flipping one AND bit flips the classification") {
    RandomStream rng(72);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t len = 4;
        std::string top(len, '0');
        std::string bottom(len, '0');
        for (std::size_t i = 0; i < len; ++i) {
            top[i] = rng.next_double() < 0.5 ? '0' : '1';
            bottom[i] = rng.next_double() < 0.5 ? '0' : '1';
        }
        const std::size_t pos = rng.next_u64() % len;
        std::string top_on = top, bottom_on = bottom;
        top_on[pos] = '1';
        bottom_on[pos] = '1'; // AND bit at pos = 1
        std::string bottom_off = bottom_on;
        bottom_off[pos] = '0'; // AND bit at pos = 0
        const EventClass on = classify_shot({top_on, bottom_on});
        const EventClass off = classify_shot({top_on, bottom_off});
        CHECK(on != off);
    }
}

TEST_CASE("exact_bunching reproduces the named values") {
    CHECK(std::abs(exact_bunching(1, identity_u(2), identity_u(2)) - 1.0) <= 1e-12);
    CHECK(std::abs(exact_bunching(1, identity_u(2), pauli_x()) - 0.5) <= 1e-12);
    CHECK(std::abs(exact_bunching(1, identity_u(2), pauli_z()) - 0.5) <= 1e-12);
    RandomStream rng(73);
    CHECK_THROWS_AS(exact_bunching(7, haar_random_unitary(128, rng),
                                   haar_random_unitary(128, rng)),
                    ResourceError);
}

TEST_CASE("exact_bunching matches the trace formula for Haar pairs") {
    RandomStream rng(74);
    for (const std::size_t n : {1u, 2u}) {
        const std::size_t d = std::size_t{1} << n;
        for (int rep = 0; rep < 10; ++rep) {
            const UnitaryMatrix w = haar_random_unitary(d, rng);
            const UnitaryMatrix v = haar_random_unitary(d, rng);
            const double expected = (1.0 + trace_fidelity(w, v)) / 2.0;
            CHECK(std::abs(exact_bunching(n, w, v) - expected) <= 1e-9);
        }
    }
}

TEST_CASE("swap-test pairing is insensitive to register-wide relabeling") {
    // Applying the same extra unitary inside both halves of the pairing
    // cannot change the statistics; spot-check by comparing n = 2 modules
    // against the tensor-square route at n = 1.
    RandomStream rng(75);
    const UnitaryMatrix w1 = haar_random_unitary(2, rng);
    const UnitaryMatrix v1 = haar_random_unitary(2, rng);
    // W = w1 (x) I, V = v1 (x) I acting on two qubits
    ComplexMatrix w2(4, 4), v2(4, 4);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            w2.at(r, c) = w1.at(r, c);
            w2.at(r + 2, c + 2) = w1.at(r, c);
            v2.at(r, c) = v1.at(r, c);
            v2.at(r + 2, c + 2) = v1.at(r, c);
        }
    }
    const double p2 = exact_bunching(2, UnitaryMatrix(std::move(w2)), UnitaryMatrix(std::move(v2)));
    // Tr((I (x) w1)† (I (x) v1))/4 = Tr(w1†v1)/2
    const double expected = (1.0 + std::norm(tqme_test::trace_overlap(w1, v1))) / 2.0;
    CHECK(std::abs(p2 - expected) <= 1e-9);
}

TEST_CASE("swap-test pair order does not change the statistics") {
    // The pairing contract is top qubit i with bottom qubit i; processing
    // the pairs in any permuted order must leave the statistics unchanged.
    RandomStream rng(84);
    const UnitaryMatrix w = haar_random_unitary(4, rng);
    const UnitaryMatrix v = haar_random_unitary(4, rng);
    const double canonical = exact_bunching(2, w, v);

    const std::size_t order[4] = {2, 0, 3, 1};
    Circuit c;
    c.n_qubits = 8;
    for (std::size_t q = 0; q < 2; ++q) {
        c.append(Gate::h(q));
    }
    for (std::size_t q = 0; q < 2; ++q) {
        c.append(Gate::cnot(q, q + 2));
    }
    for (std::size_t q = 0; q < 2; ++q) {
        c.append(Gate::h(4 + q));
    }
    for (std::size_t q = 0; q < 2; ++q) {
        c.append(Gate::cnot(4 + q, 4 + q + 2));
    }
    c.append(Gate::unitary({0, 1}, w.matrix()));
    c.append(Gate::unitary({4, 5}, v.matrix()));
    for (const std::size_t i : order) {
        c.append(Gate::cnot(i, 4 + i));
        c.append(Gate::h(i));
    }
    const QubitState final_state = run_circuit(c, QubitState(8));
    double p_even = 0.0;
    for (std::size_t idx = 0; idx < final_state.dim(); ++idx) {
        const std::size_t top = idx & 0xF;
        const std::size_t bottom = idx >> 4;
        if ((std::popcount(top & bottom) & 1) == 0) {
            p_even += std::norm(final_state.amplitudes()[idx]);
        }
    }
    CHECK(std::abs(p_even - canonical) <= 1e-12);
}

TEST_CASE("run_protocol is exact for identical modules") {
    RandomStream rng(76);
    const UnitaryMatrix w = random_rx_ry(rng);
    RandomStream shots_rng(77);
    const FidelityEstimate est = run_protocol(1, w, w, 100000, shots_rng);
    CHECK(est.p_hat == 1.0);
    CHECK(est.f_gate_hat == 1.0);
}

TEST_CASE("run_protocol converges to the photonic fidelity chain") {
    RandomStream rng(78);
    const UnitaryMatrix w = haar_random_unitary(2, rng);
    const UnitaryMatrix v = haar_random_unitary(2, rng);
    const FidelityReport chain = fidelity_chain(w, v);
    RandomStream shots_rng(79);
    const std::uint64_t shots = 1000000;
    const FidelityEstimate est = run_protocol(1, w, v, shots, shots_rng);
    const double sigma = protocol_sigma(chain.p_bunch, 2, shots);
    CHECK(std::abs(est.f_gate_hat - chain.f_gate) <= 3.0 * sigma);
}

TEST_CASE("rx/ry module pairs agree with the closed-form chain") {
    RandomStream rng(80);
    for (int rep = 0; rep < 3; ++rep) {
        const UnitaryMatrix w = random_rx_ry(rng);
        const UnitaryMatrix v = random_rx_ry(rng);
        const FidelityReport chain = fidelity_chain(w, v);
        RandomStream shots_rng = rng.derive(static_cast<std::uint64_t>(rep));
        const std::uint64_t shots = 200000;
        const FidelityEstimate est = run_protocol(1, w, v, shots, shots_rng);
        const double sigma = protocol_sigma(chain.p_bunch, 2, shots);
        CHECK(std::abs(est.f_gate_hat - chain.f_gate) <= 4.0 * sigma);
    }
}

TEST_CASE("unfold_readout is the identity for a zero-error model") {
    const std::map<std::string, double> counts = {{"00", 70.0}, {"01", 20.0}, {"11", 10.0}};
    const auto unfolded = unfold_readout(counts, ConfusionModel::uniform(2, 0.0, 0.0));
    CHECK(unfolded.at("00") == 70.0);
    CHECK(unfolded.at("01") == 20.0);
    CHECK(unfolded.at("11") == 10.0);
}

TEST_CASE("unfold_readout inverts an exact corruption") {
    // single qubit, delta distribution
    const double p = 0.1;
    std::map<std::string, double> corrupted = {{"0", 900.0}, {"1", 100.0}}; // C * delta_0 * 1000
    const auto recovered = unfold_readout(corrupted, ConfusionModel::uniform(1, p, p));
    CHECK(std::abs(recovered.at("0") - 1000.0) <= 1e-9);
    CHECK(recovered.count("1") == 0);

    // 4-bit distribution, per-qubit forward corruption applied in the test
    const double p01 = 0.07, p10 = 0.04;
    std::vector<double> truth(16, 0.0);
    RandomStream rng(81);
    double total = 0.0;
    for (auto& v : truth) {
        v = rng.next_double();
        total += v;
    }
    for (auto& v : truth) {
        v *= 1000.0 / total;
    }
    std::vector<double> measured = truth;
    for (std::size_t q = 0; q < 4; ++q) {
        std::vector<double> next(16, 0.0);
        for (std::size_t i = 0; i < 16; ++i) {
            const bool bit = (i >> q) & 1u;
            const std::size_t flipped = i ^ (std::size_t{1} << q);
            if (!bit) {
                next[i] += (1.0 - p01) * measured[i];
                next[flipped] += p01 * measured[i];
            } else {
                next[i] += (1.0 - p10) * measured[i];
                next[flipped] += p10 * measured[i];
            }
        }
        measured = next;
    }
    std::map<std::string, double> measured_map;
    for (std::size_t i = 0; i < 16; ++i) {
        std::string bits(4, '0');
        for (std::size_t q = 0; q < 4; ++q) {
            if ((i >> q) & 1u) {
                bits[3 - q] = '1';
            }
        }
        measured_map[bits] = measured[i];
    }
    const auto recovered4 = unfold_readout(measured_map, ConfusionModel::uniform(4, p01, p10));
    double recovered_total = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        std::string bits(4, '0');
        for (std::size_t q = 0; q < 4; ++q) {
            if ((i >> q) & 1u) {
                bits[3 - q] = '1';
            }
        }
        const double value = recovered4.count(bits) ? recovered4.at(bits) : 0.0;
        CHECK(std::abs(value - truth[i]) <= 1e-9);
        recovered_total += value;
    }
    CHECK(std::abs(recovered_total - 1000.0) <= 1e-9);
}

TEST_CASE("unfolding beats the raw estimate under readout noise") {
    RandomStream rng(82);
    const UnitaryMatrix w = identity_u(2);
    const UnitaryMatrix v = UnitaryMatrix(rx_matrix(1.0));
    const double f_true = fidelity_chain(w, v).f_gate;
    const auto noise = ConfusionModel::uniform(4, 0.05, 0.05);
    int mitigated_wins = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        RandomStream raw_rng = rng.derive(static_cast<std::uint64_t>(t));
        RandomStream mit_rng = rng.derive(static_cast<std::uint64_t>(t));
        const FidelityEstimate raw =
            run_protocol(1, w, v, 100000, raw_rng, noise, false);
        const FidelityEstimate mitigated =
            run_protocol(1, w, v, 100000, mit_rng, noise, true);
        if (std::abs(mitigated.f_gate_hat - f_true) < std::abs(raw.f_gate_hat - f_true)) {
            ++mitigated_wins;
        }
    }
    CHECK(mitigated_wins >= 45); // >= 90% of seeded trials
}

TEST_CASE("run_protocol records the measured histogram on request") {
    RandomStream rng(83);
    std::map<std::string, std::uint64_t> counts;
    const FidelityEstimate est =
        run_protocol(1, identity_u(2), identity_u(2), 2000, rng, std::nullopt, false, 0.95,
                     &counts);
    CHECK(est.shots == 2000);
    std::uint64_t total = 0;
    for (const auto& [bits, c] : counts) {
        CHECK(bits.size() == 4);
        total += c;
    }
    CHECK(total == 2000);
}

TEST_CASE("circuit JSON export lists the gates in order") {
    const Circuit c = tqme_qubit_circuit(1, identity_u(2), pauli_x());
    const nlohmann::json j = circuit_to_json(c);
    CHECK(j.at("n_qubits") == 4);
    CHECK(j.at("gates").size() == 10);
    CHECK(j.at("gates")[0].at("gate") == "h");
    CHECK(j.at("gates")[4].at("gate") == "unitary");
    CHECK(j.at("gates")[4].at("matrix").size() == 2);
}

TEST_SUITE_END();
