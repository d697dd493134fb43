#include "riskmmd/scenario.hpp"

#include "riskmmd/rng.hpp"

namespace riskmmd {

ScenarioInstance random_scenario(std::uint64_t seed, int n_obstacles) {
    Rng rng(derive_seed(seed, {0x5ce8e}));
    ScenarioInstance inst;
    inst.scene.d_lb = -4.0;
    inst.scene.d_ub = 4.0;
    inst.scene.d1 = -2.0;
    inst.scene.d2 = 2.0;
    inst.scene.v_d = 5.0;
    inst.scene.route_length = 60.0;

    bool start_left = rng.uniform() < 0.5;
    inst.x0.s = 0.0;
    inst.x0.d = start_left ? inst.scene.d1 : inst.scene.d2;
    inst.x0.v = rng.uniform(4.0, 6.0);

    // Obstacles ahead within the plan's reach, alternating lanes with
    // lateral jitter so the feasible gap is scenario-dependent.
    double s_next = rng.uniform(7.0, 11.0);
    for (int i = 0; i < n_obstacles; ++i) {
        bool left = (i % 2 == 0) ? start_left : !start_left;
        double d_c = (left ? inst.scene.d1 : inst.scene.d2) + rng.uniform(-0.8, 0.8);
        inst.scene.obstacles.push_back(Obstacle::fixed(s_next, d_c, 2.0, 1.2));
        s_next += rng.uniform(5.0, 8.0);
    }
    return inst;
}

Scene default_corridor(int n_obstacles, double route_length) {
    Scene scene;
    scene.d_lb = -4.0;
    scene.d_ub = 4.0;
    scene.d1 = -2.0;
    scene.d2 = 2.0;
    scene.v_d = 5.0;
    scene.route_length = route_length;
    double spacing = route_length / (n_obstacles + 2);
    for (int i = 0; i < n_obstacles; ++i) {
        double s = spacing * (i + 1.5);
        double d = (i % 2 == 0) ? scene.d1 : scene.d2;
        scene.obstacles.push_back(Obstacle::fixed(s, d, 2.5, 1.5));
    }
    return scene;
}

}  // namespace riskmmd
