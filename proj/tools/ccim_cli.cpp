// Batch front end: solve single runs, seed/parameter sweeps, cycle-model
// queries, and instance generation.

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccim/ccim.hpp"

using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct LoadedInstance {
    ccim::ProblemInstance<float> inst;
    std::optional<ccim::VecXi> truth_spins;      // CDMA ground truth
    std::optional<Eigen::VectorXd> truth_signal;  // CS ground truth (x)
    std::optional<Eigen::MatrixXd> observation;   // A, for LASSO init
    std::optional<Eigen::VectorXd> observed;      // y
    std::string kind;
};

Eigen::MatrixXd load_image(const json& spec) {
    if (spec.contains("pgm")) return ccim::read_pgm(spec["pgm"].get<std::string>());
    if (spec.contains("raw_f32")) return ccim::read_raw_f32_square(spec["raw_f32"].get<std::string>());
    const ccim::Index side = spec.value("phantom", 16);
    Eigen::MatrixXd img = ccim::phantom_image(side);
    if (spec.contains("sparsify")) img = ccim::sparsify_haar(img, spec["sparsify"].get<double>());
    return img;
}

LoadedInstance load_instance(const json& spec, std::uint64_t seed) {
    LoadedInstance out;
    if (spec.contains("file")) {
        out.inst = ccim::read_instance(spec["file"].get<std::string>());
        out.kind = "file";
        return out;
    }
    if (spec.contains("csv")) {
        out.inst = ccim::read_instance_csv(spec["csv"].get<std::string>());
        out.kind = "csv";
        return out;
    }
    if (!spec.contains("generator")) ccim::fail_validation("config: instance needs file, csv or generator");
    const json& gen = spec["generator"];
    const std::string type = gen.value("type", "");
    const std::uint64_t gseed = gen.value("seed", seed);
    if (type == "cdma") {
        auto c = ccim::gen_cdma<float>(gen.value("n", 256), gen.value("alpha", 0.6), gen.value("zeta", 0.0),
                                       gseed);
        out.inst = c.problem;
        out.truth_spins = c.truth;
        out.kind = "cdma";
    } else if (type == "cs-random") {
        auto c = ccim::gen_cs_random<float>(gen.value("n", 256), gen.value("alpha", 0.8), gen.value("a", 0.1),
                                            gen.value("zeta", 0.05), gseed);
        out.inst = c.problem;
        out.truth_signal = c.truth_x;
        out.observation = c.observation;
        out.observed = c.observed;
        out.kind = "cs-random";
    } else if (type == "cs-image") {
        auto c = ccim::gen_cs_image<float>(load_image(gen.value("image", json::object())),
                                           gen.value("alpha", 0.4), gen.value("gamma", 1e-4),
                                           gen.value("zeta", 0.0), gseed);
        out.inst = c.problem;
        out.truth_signal = c.truth_x;
        out.observation = c.observation;
        out.observed = c.observed;
        out.kind = "cs-image";
    } else {
        ccim::fail_validation("config: unknown generator type '" + type + "'");
    }
    return out;
}

ccim::OpenLoopConfig open_loop_from(const json& cfg, std::uint64_t seed) {
    ccim::OpenLoopConfig c;
    const json j = cfg.value("open_loop", json::object());
    c.dt = j.value("dt", c.dt);
    c.k_gain = j.value("k_gain", c.k_gain);
    c.gs_sq = j.value("gs_sq", c.gs_sq);
    c.eta = j.value("eta", c.eta);
    c.n_step = j.value("n_step", c.n_step);
    const std::string chi = j.value("chi", "identity");
    if (chi == "identity")
        c.chi = ccim::ChiFunction::Identity;
    else if (chi == "absolute")
        c.chi = ccim::ChiFunction::Absolute;
    else
        ccim::fail_validation("config: chi must be identity or absolute");
    c.pump.p_max = j.value("p_max", 2.0);
    c.pump.n_step = c.n_step;
    c.pump.dt = c.dt;
    c.seed = seed;
    return c;
}

ccim::ClosedLoopConfig closed_loop_from(const json& cfg, std::uint64_t seed) {
    ccim::ClosedLoopConfig c;
    const json j = cfg.value("closed_loop", json::object());
    c.dt = j.value("dt", c.dt);
    c.k_gain = j.value("k_gain", c.k_gain);
    c.lambda = j.value("lambda", c.lambda);
    c.tau = j.value("tau", c.tau);
    c.beta = j.value("beta", c.beta);
    c.n_step = j.value("n_step", c.n_step);
    c.pump.p_tr = j.value("p_tr", 1.0);
    c.pump.dp = j.value("dp", 0.6);
    c.seed = seed;
    return c;
}

ccim::SorConfig sor_from(const json& cfg) {
    ccim::SorConfig c;
    const json j = cfg.value("sor", json::object());
    c.dt = j.value("dt", c.dt);
    c.n_step = j.value("n_step", c.n_step);
    return c;
}

ccim::AlternatingConfig alternating_from(const json& cfg, std::uint64_t seed) {
    ccim::AlternatingConfig c;
    const json j = cfg.value("alternating", json::object());
    c.n_outer = j.value("n_outer", c.n_outer);
    c.use_closed_loop = j.value("inner", std::string("open-loop")) == "closed-loop";
    c.open = open_loop_from(cfg, seed);
    c.closed = closed_loop_from(cfg, seed);
    c.sor = sor_from(cfg);
    c.thresh.eta_init = j.value("eta_init", c.thresh.eta_init);
    c.thresh.eta_end = j.value("eta_end", c.thresh.eta_end);
    c.thresh.n_outer = c.n_outer;
    if (j.contains("r_init")) c.r_init = j["r_init"].get<std::vector<double>>();
    c.seed = seed;
    return c;
}

ccim::RunOptions options_from(const json& cfg, int workers_flag) {
    ccim::RunOptions o;
    o.workers = workers_flag;
    if (cfg.contains("tiling")) {
        ccim::TilingConfig t;
        t.p_b = cfg["tiling"].value("p_b", 1);
        t.p_r = cfg["tiling"].value("p_r", 64);
        t.p_c = cfg["tiling"].value("p_c", 32);
        o.tiling = t;
    }
    o.energy_stride = cfg.value("energy_stride", 0);
    return o;
}

int default_workers() {
    if (const char* env = std::getenv("CCIM_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

std::vector<std::uint64_t> seeds_from(const json& cfg, std::uint64_t fallback) {
    if (cfg.contains("seeds")) {
        const json& s = cfg["seeds"];
        if (s.is_array()) return s.get<std::vector<std::uint64_t>>();
        if (s.is_object()) {
            const std::uint64_t from = s.value("from", 0);
            const std::uint64_t count = s.value("count", 1);
            std::vector<std::uint64_t> out(count);
            for (std::uint64_t i = 0; i < count; ++i) out[i] = from + i;
            return out;
        }
        ccim::fail_validation("config: seeds must be an array or {from,count}");
    }
    return {fallback};
}

struct SingleRun {
    json result;
    std::function<void(const std::string&)> write_trajectory;
};

template <typename Scalar>
SingleRun run_one(const LoadedInstance& loaded, const json& cfg, const std::string& algorithm,
                  std::uint64_t seed, const ccim::RunOptions& base_opt, bool want_trajectory) {
    ccim::ProblemInstance<Scalar> inst = loaded.inst.template cast<Scalar>();
    ccim::RunOptions opt = base_opt;
    opt.record_trajectory = want_trajectory;

    ccim::RunResult<Scalar> r;
    if (algorithm == "open-loop") {
        r = ccim::run_open_loop(inst, open_loop_from(cfg, seed), opt);
    } else if (algorithm == "closed-loop") {
        r = ccim::run_closed_loop(inst, closed_loop_from(cfg, seed), opt);
    } else if (algorithm == "sor") {
        if (inst.mode != ccim::HamiltonianMode::Qubo)
            ccim::fail_validation("sor requires a QUBO instance with a support vector");
        ccim::VecXi q;
        if (cfg.contains("sor") && cfg["sor"].contains("q")) {
            const auto qv = cfg["sor"]["q"].get<std::vector<int>>();
            q = Eigen::Map<const ccim::VecXi>(qv.data(), static_cast<ccim::Index>(qv.size()));
        } else {
            ccim::fail_validation("sor requires config sor.q (support vector)");
        }
        r = ccim::run_jacobi_sor(inst, q, sor_from(cfg), ccim::Vec<Scalar>::Zero(inst.n), opt);
    } else if (algorithm == "alternating") {
        ccim::AlternatingConfig ac = alternating_from(cfg, seed);
        const json aj = cfg.value("alternating", json::object());
        if (aj.value("lasso_init", false)) {
            if (!loaded.observation) ccim::fail_validation("lasso_init needs a generated CS instance");
            const Eigen::VectorXd x0 = ccim::lasso_init(*loaded.observation, *loaded.observed,
                                                        aj.value("lasso_l1", 0.01),
                                                        aj.value("lasso_iters", 200));
            ac.r_init.assign(x0.data(), x0.data() + x0.size());
        }
        if (loaded.truth_signal) {
            const ccim::Vec<Scalar> truth = loaded.truth_signal->cast<Scalar>();
            r = ccim::run_alternating(inst, ac, opt, &truth);
        } else {
            r = ccim::run_alternating(inst, ac, opt);
        }
    } else {
        ccim::fail_validation("unknown algorithm '" + algorithm + "'");
    }

    json res;
    res["algorithm"] = algorithm;
    res["seed"] = seed;
    res["n"] = inst.n;
    res["final_energy"] = r.final_energy;
    res["wall_ms"] = r.wall_ms;
    res["cycles_per_step"] = r.cycles_per_step;
    res["steps"] = r.steps;
    res["spins"] = std::vector<int>(r.spins.data(), r.spins.data() + r.spins.size());
    if (algorithm == "sor" || algorithm == "alternating") {
        std::vector<double> sig(r.signal.size());
        for (ccim::Index i = 0; i < r.signal.size(); ++i) sig[i] = static_cast<double>(r.signal[i]);
        res["signal"] = sig;
        if (algorithm == "sor") res["residual_inf"] = r.residual_inf;
    }
    if (loaded.truth_spins) res["ber"] = ccim::ber(r.spins, *loaded.truth_spins);
    if (loaded.truth_signal && (algorithm == "alternating" || algorithm == "sor")) {
        ccim::Vec<Scalar> sig = r.signal;
        res["rmse"] = ccim::rmse(sig, loaded.truth_signal->cast<Scalar>().eval());
    }
    if (!r.trace.steps.empty()) {
        res["energy_trace"] = {{"steps", r.trace.steps}, {"energies", r.trace.energies}};
    }
    if (!r.outer_metric.empty()) res["rmse_per_outer"] = r.outer_metric;

    auto frames = std::make_shared<std::vector<ccim::TrajectoryFrame<Scalar>>>(std::move(r.trajectory));
    return SingleRun{std::move(res),
                     [frames](const std::string& path) { ccim::write_trajectory_csv(path, *frames); }};
}

SingleRun run_dispatch(const LoadedInstance& loaded, const json& cfg, const std::string& algorithm,
                       std::uint64_t seed, const ccim::RunOptions& opt, const std::string& precision,
                       bool want_trajectory) {
    if (precision == "f32") return run_one<float>(loaded, cfg, algorithm, seed, opt, want_trajectory);
    if (precision == "f64") return run_one<double>(loaded, cfg, algorithm, seed, opt, want_trajectory);
    ccim::fail_validation("precision must be f32 or f64");
}

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) ccim::fail_io("cannot open config: " + path);
    json cfg;
    try {
        is >> cfg;
    } catch (const std::exception& e) {
        ccim::fail_validation(std::string("config parse error: ") + e.what());
    }
    return cfg;
}

void emit(const std::string& out_path, const std::string& body) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream os(out_path);
    if (!os) ccim::fail_io("cannot open for writing: " + out_path);
    os << body;
    if (!os) ccim::fail_io("write failed: " + out_path);
}

int cmd_solve(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
              const std::string& out_path, const std::string& trajectory_path, std::string precision,
              int workers, double clock_mhz) {
    const json cfg = load_config(config_path);
    const std::uint64_t seed = seed_flag ? *seed_flag : cfg.value("seed", 0);
    if (precision.empty()) precision = cfg.value("precision", "f32");
    const std::string algorithm = cfg.value("algorithm", "");
    if (algorithm.empty()) ccim::fail_validation("config: algorithm is required");

    const LoadedInstance loaded = load_instance(cfg.value("instance", json::object()), seed);
    const ccim::RunOptions opt = options_from(cfg, workers);
    SingleRun run = run_dispatch(loaded, cfg, algorithm, seed, opt, precision, !trajectory_path.empty());

    json out;
    out["config"] = cfg;
    out["config"]["seed"] = seed;
    out["config"]["precision"] = precision;
    out["result"] = run.result;
    if (clock_mhz > 0)
        out["result"]["time_per_step_us"] =
            run.result["cycles_per_step"].get<double>() / clock_mhz;
    out["timestamp"] = static_cast<long>(std::time(nullptr));

    if (!trajectory_path.empty()) run.write_trajectory(trajectory_path);
    emit(out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, std::string precision,
              int workers) {
    const json cfg = load_config(config_path);
    if (precision.empty()) precision = cfg.value("precision", "f32");
    if (!cfg.contains("sweep")) ccim::fail_validation("config: sweep block is required");
    const json sweep = cfg["sweep"];
    const std::vector<std::uint64_t> seeds = seeds_from(cfg, cfg.value("seed", 0));
    if (seeds.empty()) ccim::fail_validation("sweep: seeds list is empty");

    std::vector<std::string> algorithms;
    if (sweep.contains("algorithms"))
        algorithms = sweep["algorithms"].get<std::vector<std::string>>();
    else
        algorithms = {cfg.value("algorithm", std::string("open-loop"))};

    const std::string param = sweep.value("param", "none");
    std::vector<double> values = sweep.value("values", std::vector<double>{});
    if (param != "none" && values.empty()) ccim::fail_validation("sweep: empty parameter grid");
    if (param == "none") values = {0.0};

    struct Job {
        std::string algorithm;
        double value;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& alg : algorithms)
        for (double v : values)
            for (auto s : seeds) jobs.push_back({alg, v, s});

    std::vector<std::string> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job& job = jobs[idx];
            std::ostringstream row;
            row << job.seed << ',' << job.value << ',' << job.algorithm << ',';
            try {
                json run_cfg = cfg;
                if (param != "none") {
                    if (param == "eta") {
                        run_cfg["open_loop"]["eta"] = job.value;
                        run_cfg["alternating"]["eta_init"] = job.value;
                        run_cfg["alternating"]["eta_end"] = job.value;
                        run_cfg["closed_loop"]["lambda"] = job.value * job.value / 2.0;
                    } else {
                        run_cfg["instance"]["generator"][param] = job.value;
                    }
                }
                const LoadedInstance loaded = load_instance(run_cfg.value("instance", json::object()),
                                                            job.seed);
                ccim::RunOptions opt = options_from(run_cfg, 1);
                SingleRun run =
                    run_dispatch(loaded, run_cfg, job.algorithm, job.seed, opt, precision, false);
                double metric = std::numeric_limits<double>::quiet_NaN();
                if (run.result.contains("ber")) metric = run.result["ber"].get<double>();
                if (run.result.contains("rmse")) metric = run.result["rmse"].get<double>();
                row << metric << ',' << run.result["final_energy"].get<double>() << ','
                    << run.result["wall_ms"].get<double>() << ",ok";
            } catch (const ccim::Error& e) {
                row << "nan,nan,nan,error: " << e.what();
            }
            rows[idx] = row.str();
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    for (int t = 0; t < nw; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    std::ostringstream body;
    body << "seed,param,algorithm,metric,energy,wall_ms,status\n";
    for (const auto& r : rows) body << r << '\n';
    emit(out_path, body.str());
    return 0;
}

int cmd_estimate_cycles(long n, const std::string& algorithm, int p_b, int p_r, int p_c, int c_e_flag,
                        double clock_mhz) {
    ccim::TilingConfig t{p_b, p_r, p_c};
    long cycles = 0;
    if (algorithm == "sb") {
        if (p_b == 1 && p_r == 64) t = ccim::TilingConfig{8, 32, 32};  // published SB tiling
        cycles = ccim::estimate_cycles_overlapped(n, t);
    } else {
        int c_e = c_e_flag;
        if (c_e < 0) {
            if (algorithm == "open-loop")
                c_e = ccim::te_cycles_open_loop();
            else if (algorithm == "closed-loop")
                c_e = ccim::te_cycles_closed_loop();
            else if (algorithm == "sor")
                c_e = ccim::te_cycles_sor();
            else
                ccim::fail_validation("estimate-cycles: unknown algorithm '" + algorithm + "'");
        }
        cycles = ccim::estimate_cycles_sequential(n, t, c_e);
    }
    std::cout << "n=" << n << " algorithm=" << algorithm << " p_b=" << t.p_b << " p_r=" << t.p_r
              << " p_c=" << t.p_c << " cycles_per_step=" << cycles;
    if (clock_mhz > 0) std::cout << " time_per_step_us=" << static_cast<double>(cycles) / clock_mhz;
    std::cout << '\n';
    return 0;
}

int cmd_gen_instance(const std::string& config_path, const std::string& out_path,
                     std::optional<std::uint64_t> seed_flag) {
    const json cfg = load_config(config_path);
    const std::uint64_t seed = seed_flag ? *seed_flag : cfg.value("seed", 0);
    const LoadedInstance loaded = load_instance(cfg.value("instance", json::object()), seed);
    if (out_path.empty()) ccim::fail_validation("gen-instance: --out is required");
    ccim::write_instance(out_path, loaded.inst);
    std::cout << "wrote " << out_path << " (n=" << loaded.inst.n << ", mode="
              << ccim::to_string(loaded.inst.mode) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyber coherent Ising machine solver"};
    app.require_subcommand(1);

    std::string config_path, out_path, trajectory_path, precision, algorithm = "open-loop";
    std::optional<std::uint64_t> seed_flag;
    int workers = default_workers();
    double clock_mhz = 0.0;
    long n = 1024;
    int p_b = 1, p_r = 64, p_c = 32, c_e = -1;

    auto* solve = app.add_subcommand("solve", "run one (instance, algorithm, seed)");
    solve->add_option("--config", config_path, "config JSON")->required();
    solve->add_option("--seed", seed_flag, "seed override");
    solve->add_option("--out", out_path, "result JSON path (default stdout)");
    solve->add_option("--trajectory", trajectory_path, "trajectory CSV path");
    solve->add_option("--precision", precision, "f32|f64");
    solve->add_option("--workers", workers, "local-field worker threads");
    solve->add_option("--clock-mhz", clock_mhz, "convert cycle estimate to time");

    auto* sweep = app.add_subcommand("sweep", "run seeds x parameter grid, emit CSV");
    sweep->add_option("--config", config_path, "config JSON")->required();
    sweep->add_option("--out", out_path, "CSV path (default stdout)");
    sweep->add_option("--precision", precision, "f32|f64");
    sweep->add_option("--workers", workers, "parallel runs");

    auto* est = app.add_subcommand("estimate-cycles", "cycle-model query");
    est->add_option("--n", n, "system size")->required();
    est->add_option("--algorithm", algorithm, "open-loop|closed-loop|sor|sb");
    est->add_option("--p-b", p_b, "block parallelism");
    est->add_option("--p-r", p_r, "row parallelism");
    est->add_option("--p-c", p_c, "column tile width");
    est->add_option("--c-e", c_e, "TE cycles override");
    est->add_option("--clock-mhz", clock_mhz, "convert cycles to time");

    auto* gen = app.add_subcommand("gen-instance", "write a binary instance file");
    gen->add_option("--config", config_path, "config JSON with instance block")->required();
    gen->add_option("--out", out_path, "output .ccim path")->required();
    gen->add_option("--seed", seed_flag, "seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(config_path, seed_flag, out_path, trajectory_path, precision, workers,
                             clock_mhz);
        if (sweep->parsed()) return cmd_sweep(config_path, out_path, precision, workers);
        if (est->parsed()) return cmd_estimate_cycles(n, algorithm, p_b, p_r, p_c, c_e, clock_mhz);
        if (gen->parsed()) return cmd_gen_instance(config_path, out_path, seed_flag);
    } catch (const ccim::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case ccim::ErrorKind::Validation:
                return kExitValidation;
            case ccim::ErrorKind::Divergence:
                return kExitDivergence;
            case ccim::ErrorKind::Io:
                return kExitIo;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
