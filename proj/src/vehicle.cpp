#include "riskmmd/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace riskmmd {

namespace {
constexpr double kBetaParamMin = 1e-3;  // B(0, 0) is undefined

double beta_perturbation(double u_k, double c1, double c2, Rng& rng) {
    double a = std::max(2.0 * std::abs(u_k), kBetaParamMin);
    double b = std::max(5.0 * std::abs(u_k), kBetaParamMin);
    return c1 * rng.beta(a, b) + c2 * rng.normal();
}
}  // namespace

FrenetState step(const FrenetState& x, double a, double theta, const VehicleParams& p) {
    if (!std::isfinite(x.s) || !std::isfinite(x.d) || !std::isfinite(x.psi) ||
        !std::isfinite(x.v) || !std::isfinite(a) || !std::isfinite(theta)) {
        throw std::invalid_argument("step: non-finite input");
    }
    double psi_dot = x.v * std::tan(theta) / p.wheelbase;
    FrenetState next;
    next.s = x.s + x.v * std::cos(x.psi) * p.dt;
    next.d = x.d + x.v * std::sin(x.psi) * p.dt;
    next.psi = x.psi + psi_dot * p.dt;
    next.psi_dot = psi_dot;
    next.v = std::max(0.0, x.v + a * p.dt);
    return next;
}

StateTrajectory rollout(const FrenetState& x0, const ControlSequence& u,
                        const std::vector<double>& eps_a,
                        const std::vector<double>& eps_theta,
                        const VehicleParams& p) {
    std::size_t H = u.a.size();
    if (u.theta.size() != H || eps_a.size() != H || eps_theta.size() != H) {
        throw std::invalid_argument("rollout: control/noise length mismatch");
    }
    StateTrajectory traj;
    traj.reserve(H + 1);
    traj.push_back(x0);
    for (std::size_t k = 0; k < H; ++k) {
        traj.push_back(step(traj.back(), u.a[k] + eps_a[k], u.theta[k] + eps_theta[k], p));
    }
    return traj;
}

double sample_acc_noise(double a_k, const NoiseModel& nm, Rng& rng) {
    switch (nm.family) {
        case NoiseFamily::Gaussian:
            return std::abs(nm.c_a1 * a_k) * rng.normal() + nm.c_a2 * rng.normal();
        case NoiseFamily::Beta:
            return beta_perturbation(a_k, nm.c_a1, nm.c_a2, rng);
    }
    throw std::invalid_argument("sample_acc_noise: unknown noise family");
}

double sample_steer_noise(double theta_k, const NoiseModel& nm, Rng& rng) {
    switch (nm.family) {
        case NoiseFamily::Gaussian:
            return std::abs(nm.c_th1 * theta_k) * rng.normal() + nm.c_th2 * rng.normal();
        case NoiseFamily::Beta:
            return beta_perturbation(theta_k, nm.c_th1, nm.c_th2, rng);
    }
    throw std::invalid_argument("sample_steer_noise: unknown noise family");
}

NoiseDraw sample_noise(const ControlSequence& u, const NoiseModel& nm,
                       std::uint64_t rng_seed) {
    NoiseDraw draw;
    std::size_t H = u.a.size();
    draw.eps_a.resize(H);
    draw.eps_theta.resize(H);
    Rng rng_a(derive_seed(rng_seed, {1}));
    Rng rng_th(derive_seed(rng_seed, {2}));
    for (std::size_t k = 0; k < H; ++k) draw.eps_a[k] = sample_acc_noise(u.a[k], nm, rng_a);
    for (std::size_t k = 0; k < H; ++k) {
        draw.eps_theta[k] = sample_steer_noise(u.theta[k], nm, rng_th);
    }
    return draw;
}

FrenetState perturb_initial_state(const FrenetState& x0, const VehicleParams& p, Rng& rng) {
    FrenetState x = x0;
    x.s += p.init_std[0] * rng.normal();
    x.d += p.init_std[1] * rng.normal();
    x.psi += p.init_std[2] * rng.normal();
    x.psi_dot += p.init_std[3] * rng.normal();
    x.v = std::max(0.0, x.v + p.init_std[4] * rng.normal());
    return x;
}

Eigen::VectorXd position_row(const StateTrajectory& traj) {
    Eigen::VectorXd row(2 * (traj.size() - 1));
    for (std::size_t k = 1; k < traj.size(); ++k) {
        row(2 * (k - 1)) = traj[k].s;
        row(2 * (k - 1) + 1) = traj[k].d;
    }
    return row;
}

RolloutBatch rollout_batch(const FrenetState& x0, const ControlSequence& u,
                           const NoiseModel& nm, const VehicleParams& p, int N,
                           std::uint64_t rng_seed) {
    if (N < 1) throw std::invalid_argument("rollout_batch: N must be >= 1");
    std::size_t H = u.a.size();

    // N i.i.d. acceleration draws and N steering draws, shared across pairs.
    std::vector<std::vector<double>> eps_a(N), eps_theta(N);
    for (int i = 0; i < N; ++i) {
        Rng rng(derive_seed(rng_seed, {1, static_cast<std::uint64_t>(i)}));
        eps_a[i].resize(H);
        for (std::size_t k = 0; k < H; ++k) eps_a[i][k] = sample_acc_noise(u.a[k], nm, rng);
    }
    for (int j = 0; j < N; ++j) {
        Rng rng(derive_seed(rng_seed, {2, static_cast<std::uint64_t>(j)}));
        eps_theta[j].resize(H);
        for (std::size_t k = 0; k < H; ++k) {
            eps_theta[j][k] = sample_steer_noise(u.theta[k], nm, rng);
        }
    }

    RolloutBatch batch;
    batch.positions.resize(static_cast<Eigen::Index>(N) * N, 2 * static_cast<Eigen::Index>(H));
    batch.trajectories.resize(static_cast<std::size_t>(N) * N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            int t = i * N + j;
            Rng rng(derive_seed(rng_seed, {3, static_cast<std::uint64_t>(t)}));
            FrenetState x = perturb_initial_state(x0, p, rng);
            StateTrajectory traj = rollout(x, u, eps_a[i], eps_theta[j], p);
            batch.positions.row(t) = position_row(traj);
            batch.trajectories[static_cast<std::size_t>(t)] = std::move(traj);
        }
    }
    return batch;
}

}  // namespace riskmmd
