#include "riskmmd/cli_support.hpp"

#include <fstream>
#include <sstream>

namespace riskmmd {

namespace {
struct Preset {
    const char* name;
    NoiseFamily family;
    double c_a1, c_a2, c_th1, c_th2;
};

// Constants as reported per benchmark setting.
constexpr Preset kPresets[] = {
    {"fig3_low_gaussian", NoiseFamily::Gaussian, 0.1, 0.001, 0.1, 0.001},
    {"fig3_high_gaussian", NoiseFamily::Gaussian, 0.15, 0.001, 0.15, 0.001},
    {"fig3_low_beta", NoiseFamily::Beta, 0.1, 0.001, 0.001, 0.001},
    {"fig3_high_beta", NoiseFamily::Beta, 0.15, 0.001, 0.0015, 0.001},
    {"fig4_low_gaussian", NoiseFamily::Gaussian, 0.1, 0.001, 0.1, 0.001},
    {"fig4_high_gaussian", NoiseFamily::Gaussian, 0.15, 0.001, 0.15, 0.001},
    {"fig4_low_beta", NoiseFamily::Beta, 0.1, 0.001, 0.005, 0.001},
    {"fig4_high_beta", NoiseFamily::Beta, 0.15, 0.001, 0.0075, 0.001},
    {"table1_gaussian", NoiseFamily::Gaussian, 0.3, 0.3, 0.3, 0.01},
    {"table1_beta", NoiseFamily::Beta, 0.01, 0.3, 0.01, 0.01},
    {"table2_gaussian", NoiseFamily::Gaussian, 0.3, 0.4, 0.3, 0.01},
    {"table2_beta", NoiseFamily::Beta, 0.05, 0.4, 0.05, 0.01},
    {"zero", NoiseFamily::Gaussian, 0.0, 0.0, 0.0, 0.0},
};
}  // namespace

NoiseModel noise_preset(const std::string& name) {
    for (const Preset& p : kPresets) {
        if (name == p.name) return NoiseModel{p.family, p.c_a1, p.c_a2, p.c_th1, p.c_th2};
    }
    throw ConfigError("unknown noise preset: " + name);
}

std::vector<std::string> noise_preset_names() {
    std::vector<std::string> names;
    for (const Preset& p : kPresets) names.emplace_back(p.name);
    return names;
}

VehicleParams parse_vehicle(const Config& cfg) {
    VehicleParams p;
    p.horizon = static_cast<int>(cfg.get_int("horizon"));
    p.dt = cfg.get_double("dt", 0.1);
    p.wheelbase = cfg.get_double("wheelbase", 2.5);
    p.a_min = cfg.get_double("a_min", -4.0);
    p.a_max = cfg.get_double("a_max", 4.0);
    p.theta_min = cfg.get_double("theta_min", -0.5);
    p.theta_max = cfg.get_double("theta_max", 0.5);
    p.v_max = cfg.get_double("v_max", 15.0);
    p.init_std = {cfg.get_double("init_std_s", 0.0), cfg.get_double("init_std_d", 0.0),
                  cfg.get_double("init_std_psi", 0.0),
                  cfg.get_double("init_std_psi_dot", 0.0),
                  cfg.get_double("init_std_v", 0.0)};
    if (p.horizon < 1 || !(p.dt > 0.0) || !(p.wheelbase > 0.0)) {
        throw ConfigError("vehicle parameters require horizon >= 1, dt > 0, wheelbase > 0");
    }
    return p;
}

Scene parse_scene(const Config& cfg) {
    Scene scene;
    scene.d_lb = cfg.get_double("scene.d_lb", -4.0);
    scene.d_ub = cfg.get_double("scene.d_ub", 4.0);
    scene.d1 = cfg.get_double("scene.d1", -2.0);
    scene.d2 = cfg.get_double("scene.d2", 2.0);
    scene.v_d = cfg.get_double("scene.v_d", 5.0);
    scene.route_length = cfg.get_double("scene.route_length", 200.0);
    if (!(scene.d_lb < scene.d1 && scene.d1 < scene.d2 && scene.d2 < scene.d_ub)) {
        throw ConfigError("scene requires d_lb < d1 < d2 < d_ub");
    }
    if (!(scene.v_d > 0.0)) throw ConfigError("scene requires v_d > 0");

    // obstacles = s:d:a_e:b_e; s:d:a_e:b_e; ...
    std::string raw = cfg.get_string("scene.obstacles", "");
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ';')) {
        std::istringstream fields(item);
        std::string f;
        std::vector<double> vals;
        while (std::getline(fields, f, ':')) {
            try {
                vals.push_back(std::stod(f));
            } catch (const std::exception&) {
                throw ConfigError("scene.obstacles: bad number: " + f);
            }
        }
        if (vals.empty()) continue;
        if (vals.size() != 4) {
            throw ConfigError("scene.obstacles entries must be s:d:a_e:b_e");
        }
        scene.obstacles.push_back(Obstacle::fixed(vals[0], vals[1], vals[2], vals[3]));
    }
    return scene;
}

NoiseModel parse_noise(const Config& cfg) {
    if (cfg.has("noise.preset")) return noise_preset(cfg.get_string("noise.preset"));
    NoiseModel nm;
    std::string family = cfg.get_string("noise.family", "gaussian");
    if (family == "gaussian") {
        nm.family = NoiseFamily::Gaussian;
    } else if (family == "beta") {
        nm.family = NoiseFamily::Beta;
    } else {
        throw ConfigError("noise.family must be gaussian or beta, got: " + family);
    }
    nm.c_a1 = cfg.get_double("noise.c_a1", 0.0);
    nm.c_a2 = cfg.get_double("noise.c_a2", 0.0);
    nm.c_th1 = cfg.get_double("noise.c_th1", 0.0);
    nm.c_th2 = cfg.get_double("noise.c_th2", 0.0);
    if (nm.c_a1 < 0 || nm.c_a2 < 0 || nm.c_th1 < 0 || nm.c_th2 < 0) {
        throw ConfigError("noise constants must be nonnegative");
    }
    return nm;
}

RiskKind risk_kind_from_string(const std::string& name) {
    if (name == "mmd" || name == "MMD") return RiskKind::MMD;
    if (name == "cvar" || name == "CVaR" || name == "CVAR") return RiskKind::CVaR;
    if (name == "none" || name == "det" || name == "DET") return RiskKind::None;
    throw ConfigError("unknown risk kind: " + name);
}

const char* to_string(RiskKind kind) {
    switch (kind) {
        case RiskKind::MMD: return "MMD";
        case RiskKind::CVaR: return "CVaR";
        case RiskKind::None: return "DET";
    }
    return "unknown";
}

OptimizerConfig parse_optimizer(const Config& cfg) {
    OptimizerConfig oc;
    oc.n = static_cast<int>(cfg.get_int("opt.n", 100));
    oc.n_c = static_cast<int>(cfg.get_int("opt.n_c", 30));
    oc.n_e = static_cast<int>(cfg.get_int("opt.n_e", 10));
    oc.iters = static_cast<int>(cfg.get_int("opt.iters", 10));
    oc.N = static_cast<int>(cfg.get_int("opt.N", 4));
    oc.gamma = cfg.get_double("opt.gamma", 1.0);
    oc.eta = cfg.get_double("opt.eta", 0.7);
    oc.w1 = cfg.get_double("opt.w1", 1.0);
    oc.w2 = cfg.get_double("opt.w2", 5000.0);
    oc.w3 = cfg.get_double("opt.w3", 0.01);
    oc.risk_kind = risk_kind_from_string(cfg.get_string("opt.risk", "mmd"));
    oc.include_lane = cfg.get_bool("opt.include_lane", false);
    oc.cvar_alpha = cfg.get_double("opt.cvar_alpha", 0.9);
    oc.residual_sigma = cfg.get_double("opt.residual_sigma", 0.1);
    oc.sigma_floor = cfg.get_double("opt.sigma_floor", 1e-4);
    oc.init_std_v = cfg.get_double("opt.init_std_v", 2.0);
    oc.init_std_d = cfg.get_double("opt.init_std_d", 2.5);
    oc.distill.cem_samples = static_cast<int>(cfg.get_int("distill.cem_samples", 50));
    oc.distill.cem_iters = static_cast<int>(cfg.get_int("distill.cem_iters", 8));
    oc.distill.elite_frac = cfg.get_double("distill.elite_frac", 0.2);
    oc.distill.sigma_low = cfg.get_double("distill.sigma_low", 0.0);
    oc.distill.sigma_high = cfg.get_double("distill.sigma_high", 0.0);
    oc.distill.lambda_init_std = cfg.get_double("distill.lambda_init_std", 1.0);
    oc.distill.qp_ridge = cfg.get_double("distill.qp_ridge", 1e-6);
    oc.dirac.n_samples = static_cast<int>(cfg.get_int("dirac.n_samples", oc.N));
    oc.dirac.epsilon_std = cfg.get_double("dirac.epsilon_std", 1e-5);
    return oc;
}

MpcConfig parse_mpc(const Config& cfg) {
    MpcConfig mc;
    mc.opt = parse_optimizer(cfg);
    mc.max_steps = static_cast<int>(cfg.get_int("mpc.max_steps", 1000));
    mc.cov_reset_blend = cfg.get_double("mpc.cov_reset_blend", 0.5);
    return mc;
}

FrenetState parse_initial_state(const Config& cfg) {
    FrenetState x0;
    x0.s = cfg.get_double("x0.s", 0.0);
    x0.d = cfg.get_double("x0.d", -2.0);
    x0.psi = cfg.get_double("x0.psi", 0.0);
    x0.psi_dot = cfg.get_double("x0.psi_dot", 0.0);
    x0.v = cfg.get_double("x0.v", 5.0);
    return x0;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rollout file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line) {
            if (c == ',') c = ' ';
        }
        std::istringstream fields(line);
        std::vector<double> row;
        double v;
        while (fields >> v) row.push_back(v);
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ConfigError(path + ": ragged rows in rollout matrix");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": empty rollout matrix");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.front().size(); ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return M;
}

}  // namespace riskmmd
