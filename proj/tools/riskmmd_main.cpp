// riskmmd command-line tool: plan | benchmark | mpc | distill.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "riskmmd/cli_support.hpp"
#include "riskmmd/parallel.hpp"
#include "riskmmd/rng.hpp"
#include "riskmmd/scenario.hpp"

namespace fs = std::filesystem;
using namespace riskmmd;

namespace {

constexpr int kSchemaVersion = 1;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    long long seed = -1;  // -1: take the config's seed (default 0)
    bool resume = false;
    int threads = 0;
};

std::uint64_t effective_seed(const GlobalOpts& g, const Config& cfg) {
    if (g.seed >= 0) return static_cast<std::uint64_t>(g.seed);
    return static_cast<std::uint64_t>(cfg.get_int("seed", 0));
}

void apply_threads(const GlobalOpts& g) {
    if (g.threads > 0) {
        set_thread_count(g.threads);
    } else if (const char* env = std::getenv("RISKMMD_THREADS")) {
        set_thread_count(std::max(1, std::atoi(env)));
    }
}

std::ofstream open_out(const fs::path& path, bool append = false) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string obstacles_to_string(const Scene& scene) {
    std::ostringstream os;
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const Obstacle& o = scene.obstacles[i];
        if (i) os << "; ";
        os << o.centers[0].x() << ":" << o.centers[0].y() << ":" << o.a_e << ":" << o.b_e;
    }
    return os.str();
}

int cmd_plan(const GlobalOpts& g) {
    Config cfg = Config::from_file(g.config_path);
    VehicleParams p = parse_vehicle(cfg);
    Scene scene = parse_scene(cfg);
    NoiseModel nm = parse_noise(cfg);
    OptimizerConfig oc = parse_optimizer(cfg);
    FrenetState x0 = parse_initial_state(cfg);
    std::uint64_t seed = effective_seed(g, cfg);

    OptimizeResult res = optimize(x0, scene, nm, p, oc, seed);

    std::ostringstream rec;
    rec << "schema_version = " << kSchemaVersion << "\n"
        << "seed = " << seed << "\n"
        << "config_hash = " << cfg.hash() << "\n"
        << "method = " << to_string(oc.risk_kind) << "\n"
        << "risk = " << res.best.risk << "\n"
        << "expected_cost = " << res.best.expected_cost << "\n"
        << "control_cost = " << res.best.control_cost << "\n"
        << "total = " << res.best.total << "\n"
        << "v_set = " << res.best.setpoint.v_set << "\n"
        << "d_set = " << res.best.setpoint.d_set << "\n"
        << "failed_candidates = " << res.failed_candidates << "\n";
    std::cout << rec.str();

    fs::path out_dir(g.out_dir);
    auto result_file = open_out(out_dir / "plan_result.txt");
    result_file << rec.str();

    // Noiseless rollout of the returned controls.
    std::vector<double> zeros(res.controls.a.size(), 0.0);
    StateTrajectory traj = rollout(x0, res.controls, zeros, zeros, p);
    auto traj_file = open_out(out_dir / "plan_trajectory.csv");
    traj_file << "# schema_version=" << kSchemaVersion << "\n";
    traj_file << "k,s,d,psi,psi_dot,v,a,theta\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        traj_file << k << ',' << traj[k].s << ',' << traj[k].d << ',' << traj[k].psi << ','
                  << traj[k].psi_dot << ',' << traj[k].v << ','
                  << (k < res.controls.a.size() ? res.controls.a[k] : 0.0) << ','
                  << (k < res.controls.theta.size() ? res.controls.theta[k] : 0.0) << "\n";
    }
    return 0;
}

int cmd_benchmark(const GlobalOpts& g) {
    Config cfg = Config::from_file(g.config_path);
    VehicleParams p = parse_vehicle(cfg);
    OptimizerConfig base = parse_optimizer(cfg);
    std::uint64_t seed = effective_seed(g, cfg);

    int scenarios = static_cast<int>(cfg.get_int("bench.scenarios", 20));
    int n_obstacles = static_cast<int>(cfg.get_int("bench.n_obstacles", 3));
    int gt_rollouts = static_cast<int>(cfg.get_int("bench.gt_rollouts", 1000));
    if (gt_rollouts < 100) throw ConfigError("bench.gt_rollouts must be >= 100");
    std::vector<long> n_list = cfg.has("bench.n_list") ? cfg.get_int_list("bench.n_list")
                                                       : std::vector<long>{2, 4};
    std::vector<std::string> methods = cfg.has("bench.methods")
                                           ? cfg.get_list("bench.methods")
                                           : std::vector<std::string>{"mmd", "cvar"};
    std::vector<std::string> presets =
        cfg.has("bench.noise_presets") ? cfg.get_list("bench.noise_presets")
                                       : std::vector<std::string>{"fig3_low_gaussian"};
    if (n_list.empty() || methods.empty() || presets.empty()) {
        throw ConfigError("bench sweeps must be non-empty");
    }

    fs::path csv_path = fs::path(g.out_dir) / "benchmark.csv";
    std::set<std::string> done;
    if (g.resume && fs::exists(csv_path)) {
        std::ifstream in(csv_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("scenario_id", 0) == 0) continue;
            std::istringstream f(line);
            std::string sid, method, n, preset;
            std::getline(f, sid, ',');
            std::getline(f, method, ',');
            std::getline(f, n, ',');
            std::getline(f, preset, ',');
            done.insert(sid + "," + method + "," + n + "," + preset);
        }
    }
    bool fresh = !(g.resume && fs::exists(csv_path));
    auto csv = open_out(csv_path, /*append=*/!fresh);
    if (fresh) {
        csv << "# schema_version=" << kSchemaVersion << " config_hash=" << cfg.hash()
            << " seed=" << seed << "\n";
        csv << "scenario_id,method,N,noise_preset,gt_collision_rate,risk_value,"
               "runtime_ms,cert_ok\n";
    }

    int cert_failures = 0;
    for (int sc = 0; sc < scenarios; ++sc) {
        ScenarioInstance inst =
            random_scenario(derive_seed(seed, {0xbe, static_cast<std::uint64_t>(sc)}),
                            n_obstacles);
        for (const std::string& preset : presets) {
            NoiseModel nm = noise_preset(preset);
            for (const std::string& method : methods) {
                for (long N : n_list) {
                    RiskKind kind = risk_kind_from_string(method);
                    // Key spelling must match the emitted rows, not the
                    // config's casing, or resume would never match.
                    std::ostringstream key;
                    key << sc << "," << to_string(kind) << "," << N << "," << preset;
                    if (done.count(key.str())) continue;

                    OptimizerConfig oc = base;
                    oc.risk_kind = kind;
                    oc.N = static_cast<int>(N);
                    oc.dirac.n_samples = oc.N;
                    auto t0 = std::chrono::steady_clock::now();
                    OptimizeResult res = optimize(
                        inst.x0, inst.scene, nm, p, oc,
                        derive_seed(seed, {0x0b7, static_cast<std::uint64_t>(sc)}));
                    double ms = elapsed_ms(t0);
                    double gt = ground_truth_collision_rate(
                        inst.x0, res.controls, inst.scene, nm, p, gt_rollouts,
                        derive_seed(seed, {0x67, static_cast<std::uint64_t>(sc)}));

                    // Sample-level safety certificate: a near-zero MMD risk
                    // with exact deltas implies all scored rollouts satisfied
                    // the constraint.
                    int cert_ok = 1;
                    if (oc.risk_kind == RiskKind::MMD && oc.dirac.epsilon_std == 0.0 &&
                        res.best.risk < 1e-3) {
                        for (double h : res.best.rollout_h) {
                            if (h > 0.0) cert_ok = 0;
                        }
                    }
                    if (!cert_ok) ++cert_failures;

                    csv << sc << ',' << to_string(oc.risk_kind) << ',' << N << ',' << preset
                        << ',' << gt << ',' << res.best.risk << ',' << ms << ',' << cert_ok
                        << "\n";
                    csv.flush();
                }
            }
        }
        std::cerr << "scenario " << sc + 1 << "/" << scenarios << " done\n";
    }
    if (cert_failures > 0) {
        std::cerr << "warning: " << cert_failures << " safety-certificate violations\n";
    }
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

int cmd_mpc(const GlobalOpts& g) {
    Config cfg = Config::from_file(g.config_path);
    VehicleParams p = parse_vehicle(cfg);
    MpcConfig base = parse_mpc(cfg);
    std::uint64_t seed = effective_seed(g, cfg);

    int episodes = static_cast<int>(cfg.get_int("mpc.episodes", 50));
    int n_obstacles = static_cast<int>(cfg.get_int("mpc.n_obstacles", 8));
    double route_length = cfg.get_double("mpc.route_length", 200.0);
    std::vector<std::string> methods = cfg.has("mpc.methods")
                                           ? cfg.get_list("mpc.methods")
                                           : std::vector<std::string>{"mmd", "cvar", "det"};
    std::vector<std::string> presets = cfg.has("mpc.noise_presets")
                                           ? cfg.get_list("mpc.noise_presets")
                                           : std::vector<std::string>{"table1_gaussian"};

    Scene scene = default_corridor(n_obstacles, route_length);
    FrenetState x0 = parse_initial_state(cfg);

    fs::path out_dir(g.out_dir);
    auto metrics_csv = open_out(out_dir / "mpc_metrics.csv");
    metrics_csv << "# schema_version=" << kSchemaVersion << " config_hash=" << cfg.hash()
                << " seed=" << seed << "\n";
    metrics_csv << "method,noise_preset,episodes,collision_pct,lane_violation_pct,"
                   "avg_speed,max_speed\n";

    for (const std::string& preset : presets) {
        NoiseModel nm = noise_preset(preset);
        for (const std::string& method : methods) {
            MpcConfig mc = base;
            mc.opt.risk_kind = risk_kind_from_string(method);
            auto log_file =
                open_out(out_dir / ("episodes_" + method + "_" + preset + ".log"));
            log_file << "# schema_version=" << kSchemaVersion << "\n";

            std::vector<EpisodeLog> logs(static_cast<std::size_t>(episodes));
            for (int e = 0; e < episodes; ++e) {
                logs[static_cast<std::size_t>(e)] = run_episode(
                    x0, scene, nm, p, mc, route_length,
                    derive_seed(seed, {0xe5, static_cast<std::uint64_t>(e)}));
                const EpisodeLog& log = logs[static_cast<std::size_t>(e)];
                for (std::size_t st = 0; st < log.steps.size(); ++st) {
                    const EpisodeStep& s = log.steps[st];
                    log_file << "episode=" << e << " step=" << st << " s=" << s.state.s
                             << " d=" << s.state.d << " v=" << s.state.v << " a=" << s.a
                             << " theta=" << s.theta << " risk=" << s.plan_risk
                             << " collision=" << (s.collision ? 1 : 0)
                             << " lane_violation=" << s.lane_violation << "\n";
                }
                log_file << "episode=" << e << " status=" << to_string(log.status)
                         << " steps=" << log.steps.size()
                         << " violation_m=" << log.violation_meters;
                if (!log.abort_reason.empty()) log_file << " reason=" << log.abort_reason;
                log_file << "\n";
                std::cerr << method << "/" << preset << " episode " << e + 1 << "/"
                          << episodes << ": " << to_string(log.status) << "\n";
            }
            MetricsReport rep = compute_metrics(logs, route_length);
            metrics_csv << to_string(mc.opt.risk_kind) << ',' << preset << ','
                        << rep.episodes << ',' << rep.collision_pct << ','
                        << rep.lane_violation_pct << ',' << rep.avg_speed << ','
                        << rep.max_speed << "\n";
            metrics_csv.flush();
        }
    }
    std::cout << "wrote " << (out_dir / "mpc_metrics.csv").string() << "\n";
    return 0;
}

int cmd_distill(const GlobalOpts& g, const std::string& rollouts_path, int N) {
    Config cfg = g.config_path.empty() ? Config::from_string("")
                                       : Config::from_file(g.config_path);
    std::uint64_t seed = effective_seed(g, cfg);

    Eigen::MatrixXd O = read_matrix_csv(rollouts_path);
    auto root = static_cast<Eigen::Index>(std::llround(std::sqrt(double(O.rows()))));
    if (root * root != O.rows()) {
        throw ConfigError("rollout matrix row count " + std::to_string(O.rows()) +
                          " is not a perfect square");
    }
    if (N > O.rows()) throw ConfigError("N exceeds rollout count");

    DistillConfig dc;
    dc.cem_samples = static_cast<int>(cfg.get_int("distill.cem_samples", 50));
    dc.cem_iters = static_cast<int>(cfg.get_int("distill.cem_iters", 8));
    dc.elite_frac = cfg.get_double("distill.elite_frac", 0.2);
    dc.sigma_low = cfg.get_double("distill.sigma_low", 0.0);
    dc.sigma_high = cfg.get_double("distill.sigma_high", 0.0);
    dc.lambda_init_std = cfg.get_double("distill.lambda_init_std", 1.0);
    dc.qp_ridge = cfg.get_double("distill.qp_ridge", 1e-6);
    dc.seed = seed;

    ReducedSet rs = distill(O, N, dc);
    double baseline = random_subset_baseline(O, N, 50, derive_seed(seed, {0xba5e}));

    std::ostringstream rec;
    rec << "schema_version = " << kSchemaVersion << "\n"
        << "seed = " << seed << "\n"
        << "config_hash = " << cfg.hash() << "\n"
        << "rows = " << O.rows() << "\n"
        << "N = " << N << "\n"
        << "indices = ";
    for (std::size_t i = 0; i < rs.indices.size(); ++i) {
        rec << (i ? "," : "") << rs.indices[i];
    }
    rec << "\nbeta = ";
    for (Eigen::Index i = 0; i < rs.beta.size(); ++i) rec << (i ? "," : "") << rs.beta(i);
    rec << "\nsigma = " << rs.sigma.sigma << "\n"
        << "discrepancy = " << rs.discrepancy << "\n"
        << "random_subset_discrepancy = " << baseline << "\n"
        << "failed_candidates = " << rs.failed_candidates << "\n";
    std::cout << rec.str();
    auto out = open_out(fs::path(g.out_dir) / "distill_result.txt");
    out << rec.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MMD-based risk-aware trajectory optimization"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::string rollouts_path;
    int distill_N = 4;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", g.config_path, "config file (key = value)")
            ->required(config_required);
        sub->add_option("--seed", g.seed, "seed override");
        sub->add_option("--out", g.out_dir, "output directory");
        sub->add_option("--threads", g.threads, "worker threads (env RISKMMD_THREADS)");
    };

    CLI::App* plan = app.add_subcommand("plan", "single trajectory optimization run");
    add_common(plan, true);
    CLI::App* bench = app.add_subcommand("benchmark", "scenario sweep with ground-truth rates");
    add_common(bench, true);
    bench->add_flag("--resume", g.resume, "skip rows already present in the output CSV");
    CLI::App* mpc = app.add_subcommand("mpc", "receding-horizon metrics grid");
    add_common(mpc, true);
    CLI::App* dist = app.add_subcommand("distill", "reduced-set distillation of a rollout file");
    add_common(dist, false);
    dist->add_option("--rollouts", rollouts_path, "rollout matrix CSV")->required();
    dist->add_option("--N", distill_N, "reduced-set size")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_threads(g);
        if (plan->parsed()) return cmd_plan(g);
        if (bench->parsed()) return cmd_benchmark(g);
        if (mpc->parsed()) return cmd_mpc(g);
        if (dist->parsed()) return cmd_distill(g, rollouts_path, distill_N);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
