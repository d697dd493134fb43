#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "riskmmd/rng.hpp"

namespace riskmmd {

// Frenet-frame vehicle state on a straight reference path.
struct FrenetState {
    double s = 0.0;        // longitudinal position (m)
    double d = 0.0;        // lateral offset (m)
    double psi = 0.0;      // heading error w.r.t. reference (rad)
    double psi_dot = 0.0;  // heading-error rate (rad/s)
    double v = 0.0;        // longitudinal speed (m/s), clamped >= 0
};

using StateTrajectory = std::vector<FrenetState>;  // length H+1, [0] = x0

struct ControlSequence {
    std::vector<double> a;      // length H
    std::vector<double> theta;  // length H
};

enum class NoiseFamily { Gaussian, Beta };

// Control-dependent perturbation model for acceleration and steering.
// Gaussian:  eps = |c1 u| g1 + c2 g2,  g ~ N(0,1)
// Beta:      eps = c1 B(max(2|u|, p_min), max(5|u|, p_min)) + c2 g
struct NoiseModel {
    NoiseFamily family = NoiseFamily::Gaussian;
    double c_a1 = 0.0, c_a2 = 0.0;
    double c_th1 = 0.0, c_th2 = 0.0;
};

struct VehicleParams {
    double wheelbase = 2.5;  // m
    double dt = 0.1;         // s
    int horizon = 40;        // H
    double a_min = -4.0, a_max = 4.0;
    double theta_min = -0.5, theta_max = 0.5;
    double v_max = 15.0;
    // Initial-state p0: diagonal Gaussian std per component (s, d, psi,
    // psi_dot, v). All zeros = deterministic start.
    std::array<double, 5> init_std{0.0, 0.0, 0.0, 0.0, 0.0};
};

// One explicit-Euler step of the Frenet kinematic bicycle (curvature 0):
//   s' = v cos(psi), d' = v sin(psi), psi' = v tan(theta)/L, v' = a.
// Throws on non-finite inputs.
FrenetState step(const FrenetState& x, double a, double theta, const VehicleParams& p);

// Deterministic H-step rollout of perturbed controls (a_k + eps_a_k, ...).
StateTrajectory rollout(const FrenetState& x0, const ControlSequence& u,
                        const std::vector<double>& eps_a,
                        const std::vector<double>& eps_theta,
                        const VehicleParams& p);

// Single draw of the per-timestep control perturbations.
struct NoiseDraw {
    std::vector<double> eps_a;
    std::vector<double> eps_theta;
};
NoiseDraw sample_noise(const ControlSequence& u, const NoiseModel& nm,
                       std::uint64_t rng_seed);

double sample_acc_noise(double a_k, const NoiseModel& nm, Rng& rng);
double sample_steer_noise(double theta_k, const NoiseModel& nm, Rng& rng);

FrenetState perturb_initial_state(const FrenetState& x0, const VehicleParams& p,
                                  Rng& rng);

// N^2 stochastic rollouts from N i.i.d. acceleration-noise draws crossed with
// N steering-noise draws. Row (i*N + j) of `positions` is the flattened
// (s_1, d_1, ..., s_H, d_H) sequence of the rollout pairing acceleration
// draw i with steering draw j. Deterministic given the seed and independent
// of thread count.
struct RolloutBatch {
    Eigen::MatrixXd positions;               // N^2 x 2H
    std::vector<StateTrajectory> trajectories;  // N^2 entries, row-major (i, j)
};
RolloutBatch rollout_batch(const FrenetState& x0, const ControlSequence& u,
                           const NoiseModel& nm, const VehicleParams& p, int N,
                           std::uint64_t rng_seed);

// Flattened (s, d) row of a trajectory, matching rollout_batch's layout.
Eigen::VectorXd position_row(const StateTrajectory& traj);

}  // namespace riskmmd
