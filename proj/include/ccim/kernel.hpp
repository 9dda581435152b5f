#pragma once

#include <sstream>
#include <thread>
#include <vector>

#include "ccim/packed_symmetric.hpp"
#include "ccim/types.hpp"

namespace ccim {

/// Parallelization indices of the tiled MAC scheme: P_b block-parallel
/// groups, P_r row-parallel MAC units, P_c-wide column tiles.
struct TilingConfig {
    int p_b = 1;
    int p_r = 64;
    int p_c = 32;

    void validate(Index n) const {
        if (p_b < 1 || p_r < 1 || p_c < 1) fail_validation("tiling: indices must be positive");
        if (n % (static_cast<Index>(p_b) * p_r) != 0 || n % p_c != 0) {
            std::ostringstream os;
            os << "tiling: n=" << n << " not divisible by p_b*p_r=" << p_b * p_r << " and p_c=" << p_c;
            fail_validation(os.str());
        }
    }

    /// Largest divisors of n not exceeding the defaults, so small instances
    /// still get a valid configuration.
    static TilingConfig largest_valid(Index n, int max_pr = 64, int max_pc = 32) {
        TilingConfig t;
        t.p_b = 1;
        t.p_r = 1;
        t.p_c = 1;
        for (int v = 1; v <= max_pr; ++v)
            if (n % v == 0) t.p_r = v;
        for (int v = 1; v <= max_pc; ++v)
            if (n % v == 0) t.p_c = v;
        return t;
    }
};

namespace detail {

// Fixed pairwise reduction; the accumulation tree depends only on len.
template <typename Scalar>
Scalar pairwise_sum(const Scalar* v, Index len) {
    if (len == 1) return v[0];
    if (len == 2) return v[0] + v[1];
    const Index half = len / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, len - half);
}

template <typename Scalar>
void local_field_rows(const PackedSymmetricMatrix<Scalar>& coupling, const Vec<Scalar>& zeeman,
                      const Vec<Scalar>& w, int p_c, Index row_begin, Index row_end, Vec<Scalar>& out) {
    const Index n = coupling.size();
    std::vector<Scalar> tile(static_cast<std::size_t>(p_c));
    for (Index i = row_begin; i < row_end; ++i) {
        Scalar acc = zeeman[i];
        for (Index t = 0; t < n; t += p_c) {
            for (Index k = 0; k < p_c; ++k) {
                const Index j = t + k;
                // diagonal term is zeroed at readout, never in storage
                tile[k] = (j == i) ? Scalar(0) : coupling.read(i, j) * w[j];
            }
            acc += pairwise_sum(tile.data(), p_c);
        }
        out[i] = acc;
    }
}

}  // namespace detail

/// h_i = g_i + sum_{j != i} J_ij * sigma_j * mu_j.
/// Accumulation order is fixed (ascending column tile, pairwise inside a
/// tile), so the result is bit-identical for any worker count.
template <typename Scalar>
Vec<Scalar> local_field(const PackedSymmetricMatrix<Scalar>& coupling, const AsArg<Vec<Scalar>>& zeeman,
                        const AsArg<Vec<Scalar>>& mu, const AsArg<Vec<Scalar>>& sigma,
                        const TilingConfig& tiling, int workers = 1) {
    const Index n = coupling.size();
    if (zeeman.size() != n || mu.size() != n || sigma.size() != n)
        fail_validation("local_field: vector length mismatch");
    tiling.validate(n);

    Vec<Scalar> w = sigma.cwiseProduct(mu);
    Vec<Scalar> h(n);
    if (workers <= 1 || n < 2 * workers) {
        detail::local_field_rows(coupling, zeeman, w, tiling.p_c, 0, n, h);
        return h;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const Index chunk = (n + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
        const Index b = std::min<Index>(t * chunk, n);
        const Index e = std::min<Index>(b + chunk, n);
        if (b >= e) break;
        pool.emplace_back([&, b, e] { detail::local_field_rows(coupling, zeeman, w, tiling.p_c, b, e, h); });
    }
    for (auto& th : pool) th.join();
    return h;
}

/// Cycles per step for the sequential scheme (local field, then TE):
/// (n/p_r) * (n/p_c + c_e), with p_b fixed to 1.
inline long estimate_cycles_sequential(Index n, const TilingConfig& tiling, int c_e) {
    TilingConfig t = tiling;
    t.p_b = 1;
    t.validate(n);
    if (c_e < 0) fail_validation("estimate_cycles_sequential: c_e must be >= 0");
    return (n / t.p_r) * (n / t.p_c + c_e);
}

/// Cycles per step for the overlapped scheme (TE hidden behind the MAC
/// stream plus one idle tail interval): (n/(p_b*p_r) + 1) * (n/p_c).
inline long estimate_cycles_overlapped(Index n, const TilingConfig& tiling) {
    tiling.validate(n);
    return (n / (static_cast<Index>(tiling.p_b) * tiling.p_r) + 1) * (n / tiling.p_c);
}

inline double cycle_ratio(long alg_cycles, long sb_cycles) {
    if (sb_cycles <= 0) fail_validation("cycle_ratio: denominator must be positive");
    return static_cast<double>(alg_cycles) / static_cast<double>(sb_cycles);
}

/// Per-update cycle counts of the time-evolution pipeline, used by the CLI
/// and the run reports.
inline int te_cycles_open_loop() { return 32; }
inline int te_cycles_closed_loop() { return 32; }
inline int te_cycles_sor() { return 4; }

}  // namespace ccim
