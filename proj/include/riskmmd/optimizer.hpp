#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "riskmmd/constraints.hpp"
#include "riskmmd/frenet.hpp"
#include "riskmmd/reduced_set.hpp"
#include "riskmmd/vehicle.hpp"

namespace riskmmd {

enum class RiskKind { MMD, CVaR, None };

struct OptimizerConfig {
    int n = 100;   // batch size per iteration
    int n_c = 30;  // constraint-elite count (lowest risk)
    int n_e = 10;  // elite count (lowest total among constraint elites)
    int iters = 10;
    int N = 4;  // reduced-set size; N^2 rollouts feed the distillation
    double gamma = 1.0;
    double eta = 0.7;
    double w1 = 1.0, w2 = 5000.0, w3 = 0.01;
    RiskKind risk_kind = RiskKind::MMD;
    bool include_lane = false;
    double cvar_alpha = 0.9;
    // Kernel width for the 1-D residual embedding. The distillation sigma
    // lives in trajectory space (tens of meters over 2H coordinates) and is
    // far too wide for residuals, which are dimensionless and O(1);
    // reusing it would flatten the risk signal.
    double residual_sigma = 0.1;
    double sigma_floor = 1e-4;
    // Initial sampling spread around (v_d, x0.d).
    double init_std_v = 2.0;
    double init_std_d = 2.5;
    DistillConfig distill;
    DiracConfig dirac;
};

struct CandidateScore {
    SetpointVector setpoint;
    ControlSequence controls;
    double risk = 0.0;
    double expected_cost = 0.0;  // mean state cost over risk-scoring rollouts
    double control_cost = 0.0;   // ||a||^2 + ||theta||^2
    double total = 0.0;          // w1*expected + w2*risk + w3*control
    // Constraint values of the rollouts the risk was scored on (reduced set
    // for MMD, plain N rollouts for CVaR, the noiseless rollout otherwise).
    std::vector<double> rollout_h;
    bool failed = false;  // distill failure; excluded from elites
};

struct IterationTrace {
    double best_total = 0.0;        // best-ever total after this iteration
    double mean_elite_total = 0.0;  // mean total over the EliteSet
    double best_risk = 0.0;
};

struct OptimizeResult {
    ControlSequence controls;
    CandidateScore best;
    std::vector<IterationTrace> trace;
    SamplingDistribution final_dist;  // distribution after the last update
    int failed_candidates = 0;
};

// State cost over the trajectory:
//   sum_k (v_k - v_d)^2 + |d_k - d1||d_k - d2| + (sdd_k^2 + ddd_k^2),
// speed/lane terms over k = 1..H, second central differences (divided by
// dt^2) over the interior points k = 1..H-1.
double state_cost(const StateTrajectory& traj, const Scene& scene, double dt);

CandidateScore score_candidate(const SetpointVector& b, const FrenetState& x0,
                               const Scene& scene, const NoiseModel& nm,
                               const VehicleParams& p, const OptimizerConfig& cfg,
                               std::uint64_t rng_seed);

// Exponential-weight distribution refit on the elite (b, c) pairs with
// temperature gamma and blend eta; costs are shifted by their minimum before
// exponentiation. Covariance eigenvalues floored at sigma_floor.
SamplingDistribution update_distribution(const SamplingDistribution& dist,
                                         const std::vector<SetpointVector>& elite_b,
                                         const std::vector<double>& elite_cost,
                                         double gamma, double eta, double sigma_floor);

OptimizeResult optimize(const FrenetState& x0, const Scene& scene, const NoiseModel& nm,
                        const VehicleParams& p, const OptimizerConfig& cfg,
                        std::uint64_t rng_seed);

// Same loop started from an explicit sampling distribution (MPC warm start).
OptimizeResult optimize_from(const FrenetState& x0, const Scene& scene,
                             const NoiseModel& nm, const VehicleParams& p,
                             const OptimizerConfig& cfg, const SamplingDistribution& init,
                             std::uint64_t rng_seed);

}  // namespace riskmmd
