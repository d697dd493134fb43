#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "riskmmd/kernel.hpp"
#include "riskmmd/vehicle.hpp"

namespace riskmmd {

// Ellipsoidal obstacle in Frenet coordinates. `centers` holds the (s, d)
// center per planning step k = 1..H; a single entry means static.
struct Obstacle {
    std::vector<Eigen::Vector2d> centers;
    double a_e = 1.0;  // longitudinal semi-axis (m)
    double b_e = 1.0;  // lateral semi-axis (m)

    static Obstacle fixed(double s, double d, double a_e, double b_e) {
        return Obstacle{{Eigen::Vector2d(s, d)}, a_e, b_e};
    }
    const Eigen::Vector2d& center_at(std::size_t k) const {
        return centers.size() == 1 ? centers[0] : centers[k];
    }
};

// Two-lane corridor: bounds d_lb < d1 < d2 < d_ub, desired speed v_d.
struct Scene {
    double d_lb = -4.0, d_ub = 4.0;
    double d1 = -2.0, d2 = 2.0;
    double v_d = 5.0;
    double route_length = 200.0;
    std::vector<Obstacle> obstacles;
};

// Gaussian stand-in for the Dirac-delta embedding target: n_samples draws
// from N(0, epsilon_std^2), uniform weights.
struct DiracConfig {
    int n_samples = 4;
    double epsilon_std = 1e-5;
};

// Worst-case constraint over the trajectory steps k = 1..H:
//   h_obs,k  = max over obstacles of 1 - ((s-s_o)/a_e)^2 - ((d-d_o)/b_e)^2
//   h_lane,k = max(d - d_ub, d_lb - d)           (when include_lane)
// Returns max_k of the enabled parts; <= 0 means the trajectory is safe.
double constraint_h(const StateTrajectory& traj, const Scene& scene, bool include_lane);

// Same ellipse test for a single state (instantaneous collision check);
// obstacle centers taken at their first entry when static, step k otherwise.
bool state_in_collision(const FrenetState& x, const Scene& scene, std::size_t k = 0);

inline double residual(double h) { return h > 0.0 ? h : 0.0; }

// MMD^2 between the weighted residual embedding and the Dirac-approximation
// set, in the 1-D residual space.
double risk_mmd(const Eigen::VectorXd& residuals, const Eigen::VectorXd& beta,
                KernelWidth sigma, const DiracConfig& dc, std::uint64_t rng_seed);

// Empirical CVaR at level alpha: mean of the top ceil((1-alpha)*N) residuals.
double risk_cvar(const Eigen::VectorXd& residuals, double alpha);

// Fraction of M independent noisy rollouts of u whose obstacle-only
// constraint is violated (h > 0). Deterministic given the seed.
double ground_truth_collision_rate(const FrenetState& x0, const ControlSequence& u,
                                   const Scene& scene, const NoiseModel& nm,
                                   const VehicleParams& p, int M,
                                   std::uint64_t rng_seed);

}  // namespace riskmmd
