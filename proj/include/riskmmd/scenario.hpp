#pragma once

#include <cstdint>

#include "riskmmd/constraints.hpp"
#include "riskmmd/vehicle.hpp"

namespace riskmmd {

// Random planning scene: `n_obstacles` static ellipsoids scattered ahead of
// the ego on jittered lane centers, forcing the plan to thread between them.
struct ScenarioInstance {
    Scene scene;
    FrenetState x0;
};
ScenarioInstance random_scenario(std::uint64_t seed, int n_obstacles = 3);

// 200 m two-lane corridor with obstacles alternating lanes; the default MPC
// benchmark environment.
Scene default_corridor(int n_obstacles = 8, double route_length = 200.0);

}  // namespace riskmmd
