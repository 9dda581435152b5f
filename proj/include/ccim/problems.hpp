#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ccim/instance.hpp"
#include "ccim/noise.hpp"
#include "ccim/types.hpp"

namespace ccim {

template <typename Scalar>
struct CdmaInstance {
    ProblemInstance<Scalar> problem;
    VecXi truth;                 // information bits, all-ones by default
    Eigen::MatrixXd spreading;   // xi in {+-1}^{M x N}, scaled by 1/sqrt(M) on use
    Eigen::VectorXd received;    // y
    double alpha = 0.0;
    double zeta = 0.0;
};

template <typename Scalar>
struct CsInstance {
    ProblemInstance<Scalar> problem;  // QUBO mode
    Eigen::VectorXd truth_x;
    Eigen::MatrixXd observation;  // A
    Eigen::VectorXd observed;     // y
    double alpha = 0.0;
    double sparseness = 0.0;
    std::vector<double> reg_gamma;
    std::vector<Eigen::MatrixXd> reg_op;
};

/// Fraction of differing positions. No global-flip correction: the Zeeman
/// term breaks spin-flip symmetry.
inline double ber(const VecXi& estimate, const VecXi& truth) {
    if (estimate.size() != truth.size()) fail_validation("ber: length mismatch");
    Index diff = 0;
    for (Index i = 0; i < truth.size(); ++i)
        if (estimate[i] != truth[i]) ++diff;
    return static_cast<double>(diff) / static_cast<double>(truth.size());
}

template <typename DerivedA, typename DerivedB>
double rmse(const Eigen::MatrixBase<DerivedA>& estimate, const Eigen::MatrixBase<DerivedB>& truth) {
    if (estimate.size() != truth.size()) fail_validation("rmse: length mismatch");
    const double ss = (estimate.template cast<double>() - truth.template cast<double>()).squaredNorm();
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

namespace detail {

inline int random_sign(std::uint64_t seed, std::uint64_t stream, std::uint64_t idx) {
    return (noise_word(seed, stream, idx) >> 63) ? 1 : -1;
}

// Fisher-Yates pick of k distinct indices out of n, driven by counter words.
inline std::vector<Index> sample_without_replacement(Index n, Index k, std::uint64_t seed,
                                                     std::uint64_t stream) {
    std::vector<Index> pool(n);
    std::iota(pool.begin(), pool.end(), Index(0));
    for (Index i = 0; i < k; ++i) {
        const std::uint64_t w = noise_word(seed, stream, static_cast<std::uint64_t>(i));
        const Index j = i + static_cast<Index>(w % static_cast<std::uint64_t>(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace detail

/// CDMA multi-user detection instance: J_ij = -(1/M) sum_mu xi_i xi_j,
/// g_i = (1/sqrt(M)) sum_mu xi_i y_mu.
template <typename Scalar>
CdmaInstance<Scalar> gen_cdma(Index n, double alpha, double zeta, std::uint64_t seed,
                              const VecXi* truth_in = nullptr) {
    if (n < 2) fail_validation("gen_cdma: n must be >= 2");
    if (alpha <= 0) fail_validation("gen_cdma: alpha must be > 0");
    const Index m = static_cast<Index>(std::llround(alpha * static_cast<double>(n)));
    if (m < 1) fail_validation("gen_cdma: round(alpha*n) < 1");

    CdmaInstance<Scalar> out;
    out.alpha = alpha;
    out.zeta = zeta;
    out.truth = truth_in ? *truth_in : VecXi::Ones(n);
    if (out.truth.size() != n) fail_validation("gen_cdma: truth length mismatch");

    Eigen::MatrixXd xi(m, n);
    for (Index mu = 0; mu < m; ++mu)
        for (Index i = 0; i < n; ++i)
            xi(mu, i) = detail::random_sign(seed, 0, static_cast<std::uint64_t>(mu) * n + i);
    out.spreading = xi;

    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd y = inv_sqrt_m * (xi * out.truth.template cast<double>());
    if (zeta > 0)
        for (Index mu = 0; mu < m; ++mu) y[mu] += zeta * normal_at(seed, 1, static_cast<std::uint64_t>(mu));
    out.received = y;

    const Eigen::MatrixXd j = -(xi.transpose() * xi) / static_cast<double>(m);
    const Eigen::VectorXd g = inv_sqrt_m * (xi.transpose() * y);

    ProblemInstance<double> p = ProblemInstance<double>::make(pack<double>(j), g, HamiltonianMode::Ising);
    for (Index i = 0; i < n; ++i) p.diag_inv[i] = -1.0 / p.coupling.diag()[i];
    out.problem = p.template cast<Scalar>();
    return out;
}

/// Shared CS assembly: J = -A^T A - sum_k gamma_k G_k^T G_k (regularizers
/// penalize, so they enter with the opposite sign of the data term),
/// g = A^T y, d_i = -1/J_ii.
template <typename Scalar>
CsInstance<Scalar> cs_instance_from(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                    const std::vector<double>& gammas,
                                    const std::vector<Eigen::MatrixXd>& ops) {
    if (gammas.size() != ops.size()) fail_validation("cs_instance_from: gamma/op count mismatch");
    const Index n = a.cols();
    Eigen::MatrixXd j = -(a.transpose() * a);
    for (std::size_t k = 0; k < ops.size(); ++k) j -= gammas[k] * (ops[k].transpose() * ops[k]);
    const Eigen::VectorXd g = a.transpose() * y;

    ProblemInstance<double> p = ProblemInstance<double>::make(pack<double>(j), g, HamiltonianMode::Qubo);
    for (Index i = 0; i < n; ++i) {
        if (p.coupling.diag()[i] == 0.0) {
            std::ostringstream os;
            os << "cs instance: J_" << i << i << " is zero, d undefined";
            fail_validation(os.str());
        }
        p.diag_inv[i] = -1.0 / p.coupling.diag()[i];
    }

    CsInstance<Scalar> out;
    out.problem = p.template cast<Scalar>();
    out.observation = a;
    out.observed = y;
    out.reg_gamma = gammas;
    out.reg_op = ops;
    return out;
}

/// Random compressed-sensing instance: A entries i.i.d. N(0, 1/M), support of
/// round(a*n) entries, nonzeros i.i.d. N(0,1), y = A x + noise.
template <typename Scalar>
CsInstance<Scalar> gen_cs_random(Index n, double alpha, double a, double zeta, std::uint64_t seed) {
    if (!(alpha > 0 && alpha <= 1)) fail_validation("gen_cs_random: require 0 < alpha <= 1");
    if (!(a > 0 && a < 1)) fail_validation("gen_cs_random: require 0 < a < 1");
    const Index m = static_cast<Index>(std::llround(alpha * static_cast<double>(n)));
    const Index k = static_cast<Index>(std::llround(a * static_cast<double>(n)));
    if (m < 1) fail_validation("gen_cs_random: round(alpha*n) < 1");
    if (k < 1) fail_validation("gen_cs_random: round(a*n) = 0");

    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    Eigen::MatrixXd mat(m, n);
    for (Index mu = 0; mu < m; ++mu)
        for (Index i = 0; i < n; ++i)
            mat(mu, i) = inv_sqrt_m * normal_at(seed, 0, static_cast<std::uint64_t>(mu) * n + i);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const std::vector<Index> support = detail::sample_without_replacement(n, k, seed, 1);
    for (std::size_t t = 0; t < support.size(); ++t)
        x[support[t]] = normal_at(seed, 2, static_cast<std::uint64_t>(t));

    Eigen::VectorXd y = mat * x;
    if (zeta > 0)
        for (Index mu = 0; mu < m; ++mu) y[mu] += zeta * normal_at(seed, 3, static_cast<std::uint64_t>(mu));

    CsInstance<Scalar> out = cs_instance_from<Scalar>(mat, y, {}, {});
    out.truth_x = x;
    out.alpha = alpha;
    out.sparseness = a;
    return out;
}

/// Ising gauge transformation: J'_ij = J_ij s_i s_j, g'_i = g_i s_i.
template <typename Scalar>
ProblemInstance<Scalar> gauge_transform(const ProblemInstance<Scalar>& inst, const VecXi& s) {
    if (inst.mode != HamiltonianMode::Ising)
        fail_validation("gauge_transform: undefined for QUBO instances");
    if (s.size() != inst.n) fail_validation("gauge_transform: sign vector length mismatch");
    ProblemInstance<Scalar> out = inst;
    for (Index i = 0; i < inst.n; ++i) {
        if (s[i] != 1 && s[i] != -1) fail_validation("gauge_transform: sign entries must be +-1");
        out.zeeman[i] = inst.zeeman[i] * static_cast<Scalar>(s[i]);
        for (Index j = i + 1; j < inst.n; ++j)
            out.coupling.set(i, j, inst.coupling.read(i, j) * static_cast<Scalar>(s[i] * s[j]));
    }
    return out;
}

inline double soft_threshold(double v, double t) {
    const double m = std::abs(v) - t;
    return m <= 0 ? 0.0 : (v < 0 ? -m : m);
}

/// ISTA approximate minimizer of (1/2)||y - Ax||^2 + w||x||_1 with step 1/L,
/// L from power iteration on A^T A.
inline Eigen::VectorXd lasso_init(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double l1_weight,
                                  int iters) {
    if (iters < 1) fail_validation("lasso_init: iters must be >= 1");
    if (l1_weight < 0) fail_validation("lasso_init: l1_weight must be >= 0");
    const Index n = a.cols();

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    double lmax = 1.0;
    for (int it = 0; it < 64; ++it) {
        Eigen::VectorXd w = a.transpose() * (a * v);
        lmax = w.norm();
        if (lmax == 0) break;
        v = w / lmax;
    }
    const double step = 1.0 / std::max(lmax * 1.01, 1e-12);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < iters; ++it) {
        const Eigen::VectorXd grad = a.transpose() * (a * x - y);
        for (Index i = 0; i < n; ++i) x[i] = soft_threshold(x[i] - step * grad[i], l1_weight * step);
    }
    return x;
}

}  // namespace ccim
