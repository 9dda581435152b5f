#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "ccim/ccim.hpp"

using namespace ccim;

namespace {

template <typename Scalar>
Mat<Scalar> random_symmetric(Index n, std::uint64_t seed) {
    NoiseStream rng(seed, 50);
    Mat<Scalar> m(n, n);
    for (Index i = 0; i < n; ++i) {
        m(i, i) = static_cast<Scalar>(rng.normal());
        for (Index j = i + 1; j < n; ++j) {
            m(i, j) = static_cast<Scalar>(rng.normal());
            m(j, i) = m(i, j);
        }
    }
    return m;
}

}  // namespace

TEST_CASE("pack of 2x2 identity") {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    const auto p = pack<double>(m);
    CHECK(p.upper().size() == 1);
    CHECK(p.upper()[0] == 0.0);
    CHECK(p.diag()[0] == 1.0);
    CHECK(p.diag()[1] == 1.0);
    CHECK(p.read(0, 1) == 0.0);
}

TEST_CASE("packed mirror readout") {
    PackedSymmetricMatrix<double> p(3);
    p.set(0, 1, 1.0);
    p.set(0, 2, 2.0);
    p.set(1, 2, 3.0);
    CHECK(p.read(2, 0) == 2.0);
    CHECK(p.read(1, 2) == 3.0);
    CHECK(p.read(1, 0) == 1.0);
}

TEST_CASE("pack/unpack round trip on a random symmetric matrix") {
    const Mat<double> m = random_symmetric<double>(64, 5);
    const Mat<double> back = pack<double>(m).unpack();
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("packed storage footprint") {
    PackedSymmetricMatrix<float> p(65);
    CHECK(p.upper().size() == 65u * 64u / 2u);
}

TEST_CASE("symmetric readout property on random fills") {
    PackedSymmetricMatrix<double> p(17);
    NoiseStream rng(3, 51);
    for (Index i = 0; i < 17; ++i)
        for (Index j = i; j < 17; ++j) p.set(i, j, rng.normal());
    for (Index i = 0; i < 17; ++i)
        for (Index j = 0; j < 17; ++j) CHECK(p.read(i, j) == p.read(j, i));
}

TEST_CASE("pack rejects asymmetric input naming the offender") {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 2) = 1.0;
    m(2, 0) = 2.0;
    CHECK_THROWS_WITH_AS(pack<double>(m), doctest::Contains("(0,2)"), Error);
}

TEST_CASE("local_field hand sum") {
    PackedSymmetricMatrix<double> j(3);
    j.set(0, 1, 1.0);
    j.set(0, 2, 2.0);
    j.set(1, 2, 3.0);
    const Vec<double> ones = Vec<double>::Ones(3);
    const Vec<double> g = Vec<double>::Zero(3);
    const Vec<double> h = local_field(j, g, ones, ones, TilingConfig{1, 1, 3});
    CHECK(h[0] == doctest::Approx(3.0));
    CHECK(h[1] == doctest::Approx(4.0));
    CHECK(h[2] == doctest::Approx(5.0));
}

TEST_CASE("local_field with sigma zero returns the Zeeman field") {
    PackedSymmetricMatrix<double> j(4);
    j.set(0, 3, 7.0);
    Vec<double> g(4);
    g << 1, 2, 3, 4;
    const Vec<double> h =
        local_field(j, g, Vec<double>::Ones(4), Vec<double>::Zero(4), TilingConfig{1, 2, 2});
    CHECK((h - g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("local_field skips the diagonal") {
    PackedSymmetricMatrix<double> j(2);
    j.diag() << 100.0, 100.0;
    j.set(0, 1, 1.0);
    Vec<double> mu(2);
    mu << 2.0, 3.0;
    const Vec<double> h =
        local_field(j, Vec<double>::Zero(2), mu, Vec<double>::Ones(2), TilingConfig{1, 1, 2});
    CHECK(h[0] == doctest::Approx(3.0));
    CHECK(h[1] == doctest::Approx(2.0));
}

TEST_CASE("tiled FP32 local field matches a naive 64-bit sum") {
    const Index n = 128;
    const Mat<double> m = random_symmetric<double>(n, 8);
    PackedSymmetricMatrix<float> j = pack<float>(m.cast<float>());
    NoiseStream rng(8, 52);
    Vec<float> g(n), mu(n), sigma(n);
    for (Index i = 0; i < n; ++i) {
        g[i] = static_cast<float>(rng.normal());
        mu[i] = static_cast<float>(rng.normal());
        sigma[i] = static_cast<float>(rng.normal());
    }
    const Vec<float> h = local_field(j, g, mu, sigma, TilingConfig{1, 64, 32});

    for (Index i = 0; i < n; ++i) {
        double ref = g[i];
        for (Index k = 0; k < n; ++k)
            if (k != i) ref += static_cast<double>(j.read(i, k)) * sigma[k] * mu[k];
        const double scale = std::max(1.0, std::abs(ref));
        CHECK(std::abs(h[i] - ref) / scale < 1e-4);
    }
}

TEST_CASE("local_field is bit-identical across worker counts") {
    const Index n = 128;
    PackedSymmetricMatrix<float> j = pack<float>(random_symmetric<float>(n, 9));
    NoiseStream rng(9, 53);
    Vec<float> g(n), mu(n), sigma(n);
    for (Index i = 0; i < n; ++i) {
        g[i] = static_cast<float>(rng.normal());
        mu[i] = static_cast<float>(rng.normal());
        sigma[i] = static_cast<float>(rng.normal());
    }
    const TilingConfig t{1, 64, 32};
    const Vec<float> h1 = local_field(j, g, mu, sigma, t, 1);
    const Vec<float> h2 = local_field(j, g, mu, sigma, t, 2);
    const Vec<float> h8 = local_field(j, g, mu, sigma, t, 8);
    CHECK(std::memcmp(h1.data(), h2.data(), n * sizeof(float)) == 0);
    CHECK(std::memcmp(h1.data(), h8.data(), n * sizeof(float)) == 0);
}

TEST_CASE("tiling validation") {
    CHECK_THROWS_AS(TilingConfig{}.validate(100), Error);   // 100 % 64 != 0
    CHECK_THROWS_AS((TilingConfig{0, 1, 1}).validate(8), Error);
    CHECK_NOTHROW((TilingConfig{1, 64, 32}).validate(1024));
    const TilingConfig t = TilingConfig::largest_valid(48);
    CHECK(t.p_r == 48);
    CHECK(t.p_c == 24);
    CHECK_NOTHROW(t.validate(48));
}

TEST_CASE("sequential cycle estimates") {
    const TilingConfig t{1, 64, 32};
    CHECK(estimate_cycles_sequential(1024, t, 32) == 1024);
    CHECK(estimate_cycles_sequential(2048, t, 32) == 3072);
    CHECK(estimate_cycles_sequential(4096, t, 32) == 10240);
    CHECK(estimate_cycles_sequential(1024, t, 4) == 576);
    CHECK(estimate_cycles_sequential(2048, t, 4) == 2176);
    CHECK(estimate_cycles_sequential(4096, t, 4) == 8448);
    // degenerate tiling: one row group, one tile, no TE tail
    CHECK(estimate_cycles_sequential(32, TilingConfig{1, 32, 32}, 0) == 1);
}

TEST_CASE("overlapped cycle estimates") {
    const TilingConfig sb{8, 32, 32};
    CHECK(estimate_cycles_overlapped(2048, sb) == 576);
    CHECK(estimate_cycles_overlapped(4096, sb) == 2176);
    // one MAC pass plus one idle pass
    CHECK(estimate_cycles_overlapped(4, TilingConfig{2, 2, 4}) == 2);
}

TEST_CASE("sequential cycle count is quadratic in n") {
    const TilingConfig t{1, 64, 32};
    long f[4];
    int k = 0;
    for (Index n : {1024, 2048, 3072, 4096}) f[k++] = estimate_cycles_sequential(n, t, 32);
    CHECK(f[1] > f[0]);
    CHECK(f[2] > f[1]);
    CHECK(f[3] > f[2]);
    const long d1 = f[1] - f[0], d2 = f[2] - f[1], d3 = f[3] - f[2];
    CHECK(d2 - d1 == d3 - d2);  // constant second difference
}

TEST_CASE("cycle ratios") {
    CHECK(cycle_ratio(10240, 2176) == doctest::Approx(4.70588).epsilon(1e-4));
    CHECK(cycle_ratio(2176, 576) == doctest::Approx(3.77778).epsilon(1e-4));
    CHECK(cycle_ratio(7, 7) == 1.0);
    CHECK_THROWS_AS(cycle_ratio(1, 0), Error);
}

TEST_CASE("te cycle constants") {
    CHECK(te_cycles_open_loop() == 32);
    CHECK(te_cycles_closed_loop() == 32);
    CHECK(te_cycles_sor() == 4);
}
