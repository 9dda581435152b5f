#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ccim/ccim.hpp"

using namespace ccim;

namespace {

PackedSymmetricMatrix<double> random_coupling(Index n, std::uint64_t seed) {
    NoiseStream rng(seed, 100);
    PackedSymmetricMatrix<double> j(n);
    for (Index i = 0; i < n; ++i)
        for (Index k = i + 1; k < n; ++k) j.set(i, k, rng.normal());
    return j;
}

Vec<double> random_vec(Index n, std::uint64_t seed, std::uint64_t stream) {
    NoiseStream rng(seed, stream);
    Vec<double> v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

VecXi sigma_from_bits(Index n, unsigned long bits) {
    VecXi s(n);
    for (Index i = 0; i < n; ++i) s[i] = (bits >> i) & 1 ? 1 : -1;
    return s;
}

}  // namespace

TEST_CASE("ising_energy single bond counts both orderings") {
    PackedSymmetricMatrix<double> j(2);
    j.set(0, 1, 1.0);
    Vec<double> g = Vec<double>::Zero(2);
    VecXi s(2);
    s << 1, 1;
    CHECK(ising_energy(j, g, s) == doctest::Approx(-1.0));
}

TEST_CASE("ising_energy Zeeman terms cancel") {
    PackedSymmetricMatrix<double> j(2);
    Vec<double> g(2);
    g << 1.0, -1.0;
    VecXi s(2);
    s << 1, 1;
    CHECK(ising_energy(j, g, s) == doctest::Approx(0.0));
}

TEST_CASE("ising_energy rejects bad inputs") {
    PackedSymmetricMatrix<double> j(2);
    Vec<double> g = Vec<double>::Zero(2);
    VecXi s(2);
    s << 1, 0;
    CHECK_THROWS_AS(ising_energy(j, g, s), Error);
    Vec<double> g3 = Vec<double>::Zero(3);
    VecXi s2(2);
    s2 << 1, 1;
    CHECK_THROWS_AS(ising_energy(j, g3, s2), Error);
}

TEST_CASE("ising_energy matches exhaustive minimum at its argmin") {
    const Index n = 10;
    const auto j = random_coupling(n, 42);
    const Vec<double> g = random_vec(n, 42, 101);
    double best = std::numeric_limits<double>::infinity();
    VecXi argmin;
    for (unsigned long bits = 0; bits < (1ul << n); ++bits) {
        const VecXi s = sigma_from_bits(n, bits);
        const double e = ising_energy(j, g, s);
        if (e < best) {
            best = e;
            argmin = s;
        }
    }
    CHECK(ising_energy(j, g, argmin) == doctest::Approx(best));
    CHECK(std::isfinite(best));
}

TEST_CASE("qubo_energy empty support is zero") {
    const auto j = random_coupling(4, 3);
    const Vec<double> g = random_vec(4, 3, 101);
    const Vec<double> r = random_vec(4, 3, 102);
    CHECK(qubo_energy(j, g, r, VecXi::Zero(4), 2.5) == 0.0);
}

TEST_CASE("qubo_energy single site") {
    PackedSymmetricMatrix<double> j(1);
    Vec<double> g(1), r(1);
    g << 3.0;
    r << 2.0;
    VecXi q(1);
    q << 1;
    CHECK(qubo_energy(j, g, r, q, 1.0) == doctest::Approx(-5.0));
}

TEST_CASE("qubo_energy equals ising under the spin substitution plus affine terms") {
    const Index n = 10;
    const auto j = random_coupling(n, 7);
    const Vec<double> g = random_vec(n, 7, 101);
    const Vec<double> r = Vec<double>::Ones(n);

    // rho_i = sum_{j != i} J_ij, const_j = sum_{i != j} J_ij (both orderings)
    Vec<double> rho = Vec<double>::Zero(n);
    double j_total = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k) {
            if (i == k) continue;
            rho[i] += j.read(i, k);
            j_total += j.read(i, k);
        }

    NoiseStream rng(7, 200);
    for (int trial = 0; trial < 20; ++trial) {
        VecXi sigma(n), q(n);
        for (Index i = 0; i < n; ++i) {
            sigma[i] = rng.normal() < 0 ? -1 : 1;
            q[i] = (sigma[i] + 1) / 2;
        }
        const double lhs = qubo_energy(j, g, r, q, 0.0);
        double corr = -j_total / 8.0 - 0.5 * g.sum();
        for (Index i = 0; i < n; ++i) corr -= 0.25 * (rho[i] + g[i]) * sigma[i];
        const double rhs = ising_energy(j, g, sigma) / 4.0 + corr;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("spins_from_amplitudes sign and heaviside conventions") {
    Vec<double> c(2);
    c << 0.3, -0.2;
    VecXi ising = spins_from_amplitudes(c, HamiltonianMode::Ising);
    CHECK(ising[0] == 1);
    CHECK(ising[1] == -1);
    VecXi qubo = spins_from_amplitudes(c, HamiltonianMode::Qubo);
    CHECK(qubo[0] == 1);
    CHECK(qubo[1] == 0);

    Vec<double> zero = Vec<double>::Zero(2);
    VecXi qz = spins_from_amplitudes(zero, HamiltonianMode::Qubo);
    CHECK(qz[0] == 0);
    CHECK(qz[1] == 0);
    VecXi sz = spins_from_amplitudes(zero, HamiltonianMode::Ising);
    CHECK(sz[0] == 1);
}

TEST_CASE("spins_from_amplitudes is idempotent on its own output") {
    const Vec<double> c = random_vec(32, 9, 300);
    for (HamiltonianMode mode : {HamiltonianMode::Ising, HamiltonianMode::Qubo}) {
        const VecXi first = spins_from_amplitudes(c, mode);
        const Vec<double> back = first.cast<double>();
        const VecXi second = spins_from_amplitudes(back, mode);
        CHECK((first.array() == second.array()).all());
    }
}

TEST_CASE("energies are gauge covariant") {
    const Index n = 16;
    ProblemInstance<double> inst = ProblemInstance<double>::make(
        random_coupling(n, 11), random_vec(n, 11, 101), HamiltonianMode::Ising);
    NoiseStream rng(11, 400);
    VecXi s(n);
    for (Index i = 0; i < n; ++i) s[i] = rng.normal() < 0 ? -1 : 1;
    const ProblemInstance<double> gauged = gauge_transform(inst, s);
    for (int trial = 0; trial < 50; ++trial) {
        VecXi sigma(n);
        for (Index i = 0; i < n; ++i) sigma[i] = rng.normal() < 0 ? -1 : 1;
        const VecXi flipped = sigma.cwiseProduct(s);
        CHECK(ising_energy(gauged.coupling, gauged.zeeman, flipped) ==
              doctest::Approx(ising_energy(inst.coupling, inst.zeeman, sigma)).epsilon(1e-12));
    }
}
