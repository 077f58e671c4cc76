#include <doctest.h>

#include <cmath>
#include <complex>

#include "test_helpers.hpp"
#include "tqme/errors.hpp"
#include "tqme/linalg.hpp"
#include "tqme/random.hpp"

using namespace tqme;
using tqme_test::mat2;

TEST_SUITE_BEGIN("linalg");

TEST_CASE("is_unitary accepts the identity and the Hadamard gate") {
    CHECK(is_unitary(ComplexMatrix::identity(2), 1e-12));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(is_unitary(mat2(s, s, s, -s), 1e-12));
}

TEST_CASE("is_unitary rejects a non-unitary diagonal") {
    CHECK_FALSE(is_unitary(mat2(1.0, 0.0, 0.0, 2.0), 1e-6));
}

TEST_CASE("is_unitary requires a square matrix") {
    ComplexMatrix rect(2, 3);
    CHECK_THROWS_AS(is_unitary(rect, 1e-10), DimensionError);
}

TEST_CASE("matrix entries must be finite") {
    std::vector<cdouble> bad = {cdouble(1.0, 0.0), cdouble(0.0, 0.0), cdouble(0.0, 0.0),
                                cdouble(std::nan(""), 0.0)};
    CHECK_THROWS_AS(ComplexMatrix(2, 2, bad), ValidationError);
}

TEST_CASE("haar_random_unitary rejects d = 0") {
    RandomStream rng(1);
    CHECK_THROWS_AS(haar_random_unitary(0, rng), DimensionError);
}

TEST_CASE("haar_random_unitary d = 1 is a pure phase") {
    RandomStream rng(11);
    const UnitaryMatrix u = haar_random_unitary(1, rng);
    CHECK(std::abs(std::abs(u.at(0, 0)) - 1.0) <= 1e-12);
}

TEST_CASE("haar_random_unitary outputs pass the unitarity check") {
    RandomStream rng(5);
    for (const std::size_t d : {2u, 3u, 4u, 8u}) {
        for (int rep = 0; rep < 25; ++rep) {
            const UnitaryMatrix u = haar_random_unitary(d, rng);
            CHECK(is_unitary(u.matrix(), 1e-10));
        }
    }
}

TEST_CASE("haar moment E|Tr U|^2 = 1 for d = 2") {
    // Independent averaging run against the known first moment of the
    // Haar measure.
    RandomStream rng(2024);
    const int samples = 100000;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const UnitaryMatrix u = haar_random_unitary(2, rng);
        acc += std::norm(u.matrix().trace());
    }
    CHECK(std::abs(acc / samples - 1.0) <= 0.02);
}

TEST_CASE("equal seeds give bit-identical haar unitaries") {
    RandomStream a(99);
    RandomStream b(99);
    const UnitaryMatrix ua = haar_random_unitary(4, a);
    const UnitaryMatrix ub = haar_random_unitary(4, b);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(ua.matrix().entries()[i].real() == ub.matrix().entries()[i].real());
        CHECK(ua.matrix().entries()[i].imag() == ub.matrix().entries()[i].imag());
    }
}

TEST_CASE("derived streams differ from each other and the parent") {
    RandomStream root(7);
    RandomStream c1 = root.derive(std::uint64_t{1});
    RandomStream c2 = root.derive(std::uint64_t{2});
    RandomStream l1 = root.derive("trials");
    CHECK(c1.next_u64() != c2.next_u64());
    CHECK(c1.next_u64() != l1.next_u64());
    RandomStream c1_a = root.derive(std::uint64_t{1});
    RandomStream c1_b = root.derive(std::uint64_t{1});
    CHECK(c1_a.next_u64() == c1_b.next_u64());
}

TEST_CASE("inner_product basics") {
    const PureState e0({1.0, 0.0});
    const PureState e1({0.0, 1.0});
    const double s = 1.0 / std::sqrt(2.0);
    const PureState plus({s, s});

    CHECK(std::abs(inner_product(e0, e0) - cdouble(1.0, 0.0)) <= 1e-12);
    CHECK(std::abs(inner_product(e0, e1)) == 0.0);
    CHECK(std::abs(inner_product(e0, plus) - cdouble(s, 0.0)) <= 1e-12);

    const PureState e3({0.0, 0.0, 1.0});
    CHECK_THROWS_AS(inner_product(e0, e3), DimensionError);
}

TEST_CASE("inner_product is conjugate-symmetric on random unit pairs") {
    RandomStream rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<cdouble> a(6), b(6);
        double na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            a[i] = cdouble(rng.next_gaussian(), rng.next_gaussian());
            b[i] = cdouble(rng.next_gaussian(), rng.next_gaussian());
            na += std::norm(a[i]);
            nb += std::norm(b[i]);
        }
        for (std::size_t i = 0; i < 6; ++i) {
            a[i] /= std::sqrt(na);
            b[i] /= std::sqrt(nb);
        }
        const PureState psi(a), phi(b);
        const cdouble forward = inner_product(psi, phi);
        const cdouble backward = inner_product(phi, psi);
        CHECK(std::abs(forward - std::conj(backward)) <= 1e-14);
        CHECK(std::abs(forward) <= 1.0 + 1e-10);
    }
}

TEST_CASE("PureState rejects non-normalized amplitudes") {
    CHECK_THROWS_AS(PureState({0.5, 0.5}), ValidationError);
}

TEST_CASE("project_to_unitary recovers a perturbed unitary") {
    RandomStream rng(8);
    const UnitaryMatrix u = haar_random_unitary(3, rng);
    ComplexMatrix noisy = u.matrix();
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            noisy.at(r, c) += cdouble(1e-3 * rng.next_gaussian(), 1e-3 * rng.next_gaussian());
        }
    }
    CHECK_FALSE(is_unitary(noisy, 1e-6));
    const UnitaryMatrix projected = project_to_unitary(noisy);
    CHECK(is_unitary(projected.matrix(), 1e-10));
    CHECK(tqme_test::trace_fidelity(u, projected) > 0.9999);
}

TEST_SUITE_END();
