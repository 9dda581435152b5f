#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "ccim/energy.hpp"
#include "ccim/instance.hpp"
#include "ccim/kernel.hpp"
#include "ccim/noise.hpp"
#include "ccim/schedules.hpp"

namespace ccim {

enum class ChiFunction { Identity, Absolute };

struct OpenLoopConfig {
    double dt = 0.1;
    double k_gain = 0.5;
    double gs_sq = 1e-7;  // saturation parameter, stored squared
    double eta = 0.0;
    ChiFunction chi = ChiFunction::Identity;
    PumpScheduleOpen pump;
    int n_step = 101;
    std::uint64_t seed = 0;
};

struct ClosedLoopConfig {
    double dt = 0.02;
    double k_gain = 0.1;
    double lambda = 0.0;
    double tau = 1.0;
    double beta = 1.0;
    PumpScheduleClosed pump;
    int n_step = 501;
    std::uint64_t seed = 0;
};

struct SorConfig {
    double dt = 0.3;
    int n_step = 1001;
};

struct AlternatingConfig {
    int n_outer = 51;
    bool use_closed_loop = false;
    OpenLoopConfig open;
    ClosedLoopConfig closed;
    SorConfig sor;
    ThresholdSchedule thresh;
    std::vector<double> r_init;               // empty: default to d .* g
    std::optional<VecXi> forced_support;      // test seam: skip the inner CIM
    std::uint64_t seed = 0;
};

template <typename Scalar>
struct SolverState {
    Vec<Scalar> c;
    Vec<Scalar> s;  // quadrature amplitudes; reused as e (closed loop) / r (SOR)
    Vec<Scalar> mu;
    Vec<Scalar> sigma;
    long step = 0;
};

template <typename Scalar>
struct TrajectoryFrame {
    long step;
    Vec<Scalar> c;
    Vec<Scalar> s_or_e;
};

struct RunOptions {
    std::optional<TilingConfig> tiling;  // default: largest valid for n
    int workers = 1;
    bool record_trajectory = false;
    int trajectory_spins = 100;
    int trajectory_stride = 1;
    long energy_stride = 0;  // 0: record final energy only
};

template <typename Scalar>
struct RunResult {
    VecXi spins;            // final binarized readout (sigma or q)
    Vec<Scalar> signal;     // final continuous state (c, or r for SOR)
    double final_energy = 0.0;
    EnergyTrace trace;
    std::vector<TrajectoryFrame<Scalar>> trajectory;
    std::vector<double> outer_metric;  // per-outer-iteration RMSE (alternating)
    Vec<Scalar> signal_unmasked;       // SOR: r before support masking
    double residual_inf = 0.0;         // SOR: restricted-system residual
    double wall_ms = 0.0;
    long cycles_per_step = 0;
    std::uint64_t seed = 0;
    long steps = 0;
};

namespace detail {

template <typename Scalar>
void check_finite_amplitude(const Vec<Scalar>& c, long step, const char* what) {
    for (Index i = 0; i < c.size(); ++i) {
        if (!std::isfinite(static_cast<double>(c[i])) || std::abs(static_cast<double>(c[i])) > 1e6) {
            std::ostringstream os;
            os << what << " diverged at step " << step << ", spin " << i << " (value " << c[i] << ")";
            fail_divergence(os.str());
        }
    }
}

template <typename Scalar>
TilingConfig run_tiling(const ProblemInstance<Scalar>& inst, const RunOptions& opt) {
    TilingConfig t = opt.tiling ? *opt.tiling : TilingConfig::largest_valid(inst.n);
    t.validate(inst.n);
    return t;
}

template <typename Scalar>
void record_frame(std::vector<TrajectoryFrame<Scalar>>& out, const RunOptions& opt, long step,
                  const Vec<Scalar>& c, const Vec<Scalar>& s_or_e) {
    const Index k = std::min<Index>(opt.trajectory_spins, c.size());
    out.push_back({step, c.head(k), s_or_e.head(k)});
}

template <typename Scalar>
double state_energy(const ProblemInstance<Scalar>& inst, const Vec<Scalar>& c, double lambda) {
    const VecXi spins = spins_from_amplitudes(c, inst.mode);
    if (inst.mode == HamiltonianMode::Ising) return ising_energy(inst.coupling, inst.zeeman, spins);
    return qubo_energy(inst.coupling, inst.zeeman, inst.aux_r, spins, lambda);
}

class WallClock {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Euler-Maruyama integration of the open-loop SDE. The saturation term uses
/// the -a_i sign of the continuous-time equations; see README notes on the
/// sign convention.
template <typename Scalar>
RunResult<Scalar> run_open_loop(const ProblemInstance<Scalar>& inst, const OpenLoopConfig& cfg,
                                const RunOptions& opt = {}) {
    inst.validate();
    if (cfg.dt <= 0 || cfg.n_step < 1) fail_validation("open-loop: dt > 0 and n_step >= 1 required");
    const TilingConfig tiling = detail::run_tiling(inst, opt);
    detail::WallClock clock;

    const Index n = inst.n;
    const bool qubo = inst.mode == HamiltonianMode::Qubo;
    SolverState<Scalar> st;
    st.c = Vec<Scalar>::Zero(n);
    st.s = Vec<Scalar>::Zero(n);
    if (qubo) {
        st.mu = inst.aux_r;
        st.sigma = Vec<Scalar>::Zero(n);
    } else {
        st.mu = Vec<Scalar>::Zero(n);
        st.sigma = Vec<Scalar>::Ones(n);
    }

    const Scalar dt = static_cast<Scalar>(cfg.dt);
    const Scalar sqrt_dt = std::sqrt(dt);
    const Scalar k_gain = static_cast<Scalar>(cfg.k_gain);
    const Scalar gs = static_cast<Scalar>(std::sqrt(cfg.gs_sq));
    const Scalar eta = static_cast<Scalar>(cfg.eta);

    RunResult<Scalar> res;
    res.seed = cfg.seed;
    res.steps = cfg.n_step;
    res.cycles_per_step = estimate_cycles_sequential(n, tiling, te_cycles_open_loop());

    for (long l = 1; l <= cfg.n_step; ++l) {
        const Vec<Scalar> h = local_field(inst.coupling, inst.zeeman, st.mu, st.sigma, tiling, opt.workers);
        const Scalar p = static_cast<Scalar>(pump_open(l * cfg.dt, cfg.pump));
        for (Index i = 0; i < n; ++i) {
            const Scalar w1 = gs == Scalar(0) ? Scalar(0) : static_cast<Scalar>(normal_at(cfg.seed, 2 * i, l));
            const Scalar w2 =
                gs == Scalar(0) ? Scalar(0) : static_cast<Scalar>(normal_at(cfg.seed, 2 * i + 1, l));
            const Scalar a = st.c[i] * st.c[i] + st.s[i] * st.s[i];
            const Scalar b = std::sqrt(Scalar(0.5) + a);
            const Scalar f = cfg.chi == ChiFunction::Absolute ? std::abs(h[i]) : h[i];
            st.c[i] += dt * ((Scalar(-1) + p - a) * st.c[i] + k_gain * (f - eta)) + sqrt_dt * gs * b * w1;
            st.s[i] += dt * (Scalar(-1) - p - a) * st.s[i] + sqrt_dt * gs * b * w2;
            if (qubo)
                st.sigma[i] = static_cast<Scalar>(heaviside(st.c[i]));
            else
                st.mu[i] = st.c[i];
        }
        detail::check_finite_amplitude(st.c, l, "open-loop");
        st.step = l;
        if (opt.record_trajectory && l % opt.trajectory_stride == 0)
            detail::record_frame(res.trajectory, opt, l, st.c, st.s);
        if (opt.energy_stride > 0 && l % opt.energy_stride == 0) {
            res.trace.steps.push_back(l);
            res.trace.energies.push_back(detail::state_energy(inst, st.c, cfg.eta * cfg.eta / 2.0));
        }
    }

    res.spins = spins_from_amplitudes(st.c, inst.mode);
    res.signal = st.c;
    res.final_energy = detail::state_energy(inst, st.c, cfg.eta * cfg.eta / 2.0);
    res.wall_ms = clock.ms();
    return res;
}

/// Euler integration of the mean-field model with chaotic amplitude control.
template <typename Scalar>
RunResult<Scalar> run_closed_loop(const ProblemInstance<Scalar>& inst, const ClosedLoopConfig& cfg,
                                  const RunOptions& opt = {}) {
    inst.validate();
    if (cfg.dt <= 0 || cfg.n_step < 1) fail_validation("closed-loop: dt > 0 and n_step >= 1 required");
    if (cfg.tau <= 0 || cfg.beta < 0) fail_validation("closed-loop: tau > 0 and beta >= 0 required");
    const TilingConfig tiling = detail::run_tiling(inst, opt);
    detail::WallClock clock;

    const Index n = inst.n;
    const bool qubo = inst.mode == HamiltonianMode::Qubo;
    SolverState<Scalar> st;
    st.c = Vec<Scalar>(n);
    const double init_std = std::sqrt(0.02);  // variance 0.02
    for (Index i = 0; i < n; ++i) st.c[i] = static_cast<Scalar>(init_std * normal_at(cfg.seed, 2 * i, 0));
    st.s = Vec<Scalar>::Ones(n);  // feedback errors e
    if (qubo) {
        st.mu = inst.aux_r;
        st.sigma = Vec<Scalar>::Zero(n);
    } else {
        st.mu = Vec<Scalar>::Zero(n);
        st.sigma = Vec<Scalar>::Ones(n);
    }

    const Scalar dt = static_cast<Scalar>(cfg.dt);
    const Scalar k_gain = static_cast<Scalar>(cfg.k_gain);
    const Scalar lambda = static_cast<Scalar>(cfg.lambda);
    const Scalar tau = static_cast<Scalar>(cfg.tau);
    const Scalar beta = static_cast<Scalar>(cfg.beta);

    RunResult<Scalar> res;
    res.seed = cfg.seed;
    res.steps = cfg.n_step;
    res.cycles_per_step = estimate_cycles_sequential(n, tiling, te_cycles_closed_loop());

    for (long l = 1; l <= cfg.n_step; ++l) {
        const Vec<Scalar> h = local_field(inst.coupling, inst.zeeman, st.mu, st.sigma, tiling, opt.workers);
        const Scalar p = static_cast<Scalar>(pump_closed(l * cfg.dt, cfg.pump));
        for (Index i = 0; i < n; ++i) {
            const Scalar a = st.c[i] * st.c[i];
            st.c[i] += dt * ((Scalar(-1) + p - a) * st.c[i] +
                             k_gain * st.s[i] * (inst.aux_r[i] * h[i] - lambda));
            st.s[i] += dt * beta * (tau - a) * st.s[i];
            if (st.s[i] <= Scalar(0)) {
                std::ostringstream os;
                os << "closed-loop feedback error crossed zero at step " << l << ", spin " << i;
                fail_divergence(os.str());
            }
            if (qubo)
                st.sigma[i] = static_cast<Scalar>(heaviside(st.c[i]));
            else
                st.mu[i] = st.c[i];
        }
        detail::check_finite_amplitude(st.c, l, "closed-loop");
        st.step = l;
        if (opt.record_trajectory && l % opt.trajectory_stride == 0)
            detail::record_frame(res.trajectory, opt, l, st.c, st.s);
        if (opt.energy_stride > 0 && l % opt.energy_stride == 0) {
            res.trace.steps.push_back(l);
            res.trace.energies.push_back(detail::state_energy(inst, st.c, cfg.lambda));
        }
    }

    res.spins = spins_from_amplitudes(st.c, inst.mode);
    res.signal = st.c;
    res.final_energy = detail::state_energy(inst, st.c, cfg.lambda);
    res.wall_ms = clock.ms();
    return res;
}

/// Jacobi iteration with relaxation factor dt for the support-restricted
/// stationarity system. Off-support entries evolve by the same update but are
/// masked to zero in the returned signal.
template <typename Scalar>
RunResult<Scalar> run_jacobi_sor(const ProblemInstance<Scalar>& inst, const VecXi& q, const SorConfig& cfg,
                                 const AsArg<Vec<Scalar>>& r0, const RunOptions& opt = {}) {
    inst.validate();
    if (q.size() != inst.n || r0.size() != inst.n) fail_validation("sor: q/r0 length mismatch");
    if (cfg.n_step < 1 || cfg.dt <= 0) fail_validation("sor: dt > 0 and n_step >= 1 required");
    if (cfg.dt > 1.0) std::cerr << "warning: sor dt=" << cfg.dt << " outside the recommended (0,1]\n";
    if (inst.diag_inv.isZero()) fail_validation("sor: instance diag_inv is not populated");
    const TilingConfig tiling = detail::run_tiling(inst, opt);
    detail::WallClock clock;

    const Index n = inst.n;
    SolverState<Scalar> st;
    st.sigma = Vec<Scalar>(n);
    for (Index i = 0; i < n; ++i) {
        if (q[i] != 0 && q[i] != 1) fail_validation("sor: q entries must be 0/1");
        st.sigma[i] = static_cast<Scalar>(q[i]);
    }
    st.s = r0;  // signal r
    st.mu = r0;

    const Scalar dt = static_cast<Scalar>(cfg.dt);

    RunResult<Scalar> res;
    res.steps = cfg.n_step;
    res.cycles_per_step = estimate_cycles_sequential(n, tiling, te_cycles_sor());

    for (long l = 1; l <= cfg.n_step; ++l) {
        const Vec<Scalar> h = local_field(inst.coupling, inst.zeeman, st.mu, st.sigma, tiling, opt.workers);
        for (Index i = 0; i < n; ++i) {
            st.s[i] += dt * (-st.s[i] + inst.diag_inv[i] * h[i]);
            st.mu[i] = st.s[i];
        }
        detail::check_finite_amplitude(st.s, l, "sor");
        st.step = l;
        if (opt.record_trajectory && l % opt.trajectory_stride == 0)
            detail::record_frame(res.trajectory, opt, l, st.s, st.s);
    }

    // restricted-system residual: J_ii r_i + h_i = 0 on the support
    const Vec<Scalar> h = local_field(inst.coupling, inst.zeeman, st.mu, st.sigma, tiling, opt.workers);
    double rmax = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (q[i] == 0) continue;
        const double ri = static_cast<double>(inst.coupling.diag()[i]) * st.s[i] + static_cast<double>(h[i]);
        rmax = std::max(rmax, std::abs(ri));
    }
    res.residual_inf = rmax;

    res.signal_unmasked = st.s;
    res.signal = st.s;
    for (Index i = 0; i < n; ++i)
        if (q[i] == 0) res.signal[i] = Scalar(0);
    res.spins = q;
    res.final_energy = qubo_energy(inst.coupling, inst.zeeman, res.signal, q, 0.0);
    res.wall_ms = clock.ms();
    return res;
}

/// Alternating minimization: the inner CIM picks the support q under the
/// current signal r, Jacobi SOR then refits r on that support. Thresholds
/// follow the outer schedule; the closed-loop threshold is lambda = eta^2/2.
template <typename Scalar>
RunResult<Scalar> run_alternating(const ProblemInstance<Scalar>& inst, const AlternatingConfig& cfg,
                                  const RunOptions& opt = {},
                                  const Vec<Scalar>* truth = nullptr) {
    inst.validate();
    if (inst.mode != HamiltonianMode::Qubo) fail_validation("alternating: instance must be in QUBO mode");
    if (cfg.n_outer < 1) fail_validation("alternating: n_outer >= 1 required");
    detail::WallClock clock;

    const Index n = inst.n;
    Vec<Scalar> r(n);
    if (cfg.r_init.empty()) {
        r = inst.diag_inv.cwiseProduct(inst.zeeman);  // diagonal (matched-filter) start
    } else {
        if (static_cast<Index>(cfg.r_init.size()) != n) fail_validation("alternating: r_init length mismatch");
        for (Index i = 0; i < n; ++i) r[i] = static_cast<Scalar>(cfg.r_init[i]);
    }

    ProblemInstance<Scalar> work = inst;
    RunResult<Scalar> res;
    res.seed = cfg.seed;
    VecXi q = VecXi::Zero(n);

    // The threshold sequence is visited from eta_init down to eta_end: the
    // run starts with the strongest sparsity penalty and relaxes it, so the
    // final estimate is read out at eta_end.
    for (int outer = 1; outer <= cfg.n_outer; ++outer) {
        const double eta_n = threshold(cfg.n_outer - outer + 1, cfg.thresh);
        work.aux_r = r;

        if (cfg.forced_support) {
            q = *cfg.forced_support;
        } else if (cfg.use_closed_loop) {
            ClosedLoopConfig inner = cfg.closed;
            inner.lambda = eta_n * eta_n / 2.0;
            inner.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(outer));
            q = run_closed_loop(work, inner, opt).spins;
        } else {
            OpenLoopConfig inner = cfg.open;
            inner.eta = eta_n;
            inner.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(outer));
            q = run_open_loop(work, inner, opt).spins;
        }

        RunResult<Scalar> sor = run_jacobi_sor(work, q, cfg.sor, r, opt);
        // keep the unmasked signal: off-support entries track d_i h_i and
        // seed the next inner CIM
        r = sor.signal_unmasked;

        res.trace.steps.push_back(outer);
        res.trace.energies.push_back(
            qubo_energy(inst.coupling, inst.zeeman, r, q, eta_n * eta_n / 2.0));
        if (truth) {
            Vec<Scalar> masked = r;
            for (Index i = 0; i < n; ++i)
                if (q[i] == 0) masked[i] = Scalar(0);
            res.outer_metric.push_back(
                std::sqrt((masked - *truth).template cast<double>().squaredNorm() / double(n)));
        }
        res.cycles_per_step = sor.cycles_per_step;
        res.steps = outer;
    }

    res.spins = q;
    res.signal = r;
    for (Index i = 0; i < n; ++i)
        if (q[i] == 0) res.signal[i] = Scalar(0);
    const double eta_last = threshold(1, cfg.thresh);
    res.final_energy = qubo_energy(inst.coupling, inst.zeeman, res.signal, q, eta_last * eta_last / 2.0);
    res.wall_ms = clock.ms();
    return res;
}

}  // namespace ccim
