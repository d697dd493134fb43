#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "riskmmd/config.hpp"
#include "riskmmd/mpc.hpp"
#include "riskmmd/optimizer.hpp"

namespace riskmmd {

// Named noise presets with the constants reported for each benchmark figure
// and table; "zero" disables all perturbations.
NoiseModel noise_preset(const std::string& name);
std::vector<std::string> noise_preset_names();

// Config -> domain structs. Keys use flat `key = value` entries; `horizon`
// is required for any run that rolls out dynamics.
VehicleParams parse_vehicle(const Config& cfg);
Scene parse_scene(const Config& cfg);
NoiseModel parse_noise(const Config& cfg);
OptimizerConfig parse_optimizer(const Config& cfg);
MpcConfig parse_mpc(const Config& cfg);
FrenetState parse_initial_state(const Config& cfg);

// Whitespace/comma CSV of numbers, one rollout row per line.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

RiskKind risk_kind_from_string(const std::string& name);
const char* to_string(RiskKind kind);

}  // namespace riskmmd
