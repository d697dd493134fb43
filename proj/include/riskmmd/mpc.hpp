#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmmd/optimizer.hpp"

namespace riskmmd {

enum class EpisodeStatus { ReachedGoal, Collided, MaxSteps, Aborted };

struct EpisodeStep {
    double a = 0.0, theta = 0.0;  // applied (noisy) controls
    FrenetState state;            // realized state after the step
    double plan_risk = 0.0;
    double plan_total = 0.0;
    bool collision = false;
    double lane_violation = 0.0;  // arc-length-weighted violation meters
};

struct EpisodeLog {
    std::vector<EpisodeStep> steps;
    EpisodeStatus status = EpisodeStatus::MaxSteps;
    double violation_meters = 0.0;  // accumulated over the episode
    std::string abort_reason;
};

struct MetricsReport {
    double collision_pct = 0.0;
    double lane_violation_pct = 0.0;
    double avg_speed = 0.0;
    double max_speed = 0.0;
    int episodes = 0;
};

struct MpcConfig {
    OptimizerConfig opt;
    int max_steps = 1000;
    // Blend toward the initial covariance on each re-plan to retain
    // exploration under the warm start.
    double cov_reset_blend = 0.5;
};

// Receding-horizon loop: re-plan from the current state, apply the first
// control under a fresh true-noise draw, advance the world, and log. Begins
// from x0 perturbed by the vehicle's initial-state noise. Deterministic
// given the seed.
EpisodeLog run_episode(const FrenetState& x0, const Scene& scene, const NoiseModel& nm,
                       const VehicleParams& p, const MpcConfig& cfg, double route_length,
                       std::uint64_t rng_seed);

// Paper-style metrics grid entries; aborted episodes are excluded.
MetricsReport compute_metrics(const std::vector<EpisodeLog>& logs, double route_length);

const char* to_string(EpisodeStatus status);

}  // namespace riskmmd
