#include "riskmmd/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskmmd/rng.hpp"

namespace riskmmd {

const char* to_string(EpisodeStatus status) {
    switch (status) {
        case EpisodeStatus::ReachedGoal: return "reached_goal";
        case EpisodeStatus::Collided: return "collided";
        case EpisodeStatus::MaxSteps: return "max_steps";
        case EpisodeStatus::Aborted: return "aborted";
    }
    return "unknown";
}

EpisodeLog run_episode(const FrenetState& x0, const Scene& scene, const NoiseModel& nm,
                       const VehicleParams& p, const MpcConfig& cfg, double route_length,
                       std::uint64_t rng_seed) {
    if (!(route_length > 0.0)) throw std::invalid_argument("run_episode: route_length must be > 0");

    EpisodeLog log;
    Rng init_rng(derive_seed(rng_seed, {0x1417}));
    FrenetState x = perturb_initial_state(x0, p, init_rng);

    SamplingDistribution warm;
    warm.mean = Eigen::Vector2d(scene.v_d, x.d);
    Eigen::Matrix2d init_cov = Eigen::Vector2d(cfg.opt.init_std_v * cfg.opt.init_std_v,
                                               cfg.opt.init_std_d * cfg.opt.init_std_d)
                                   .asDiagonal();
    warm.cov = init_cov;
    bool have_warm = false;

    for (int t = 0; t < cfg.max_steps; ++t) {
        OptimizeResult plan;
        try {
            // Warm start: keep the previous plan's mean, blend covariance
            // back toward the initial spread to retain exploration.
            SamplingDistribution d = warm;
            if (!have_warm) {
                d.mean = Eigen::Vector2d(scene.v_d, x.d);
                d.cov = init_cov;
            } else {
                d.cov = (1.0 - cfg.cov_reset_blend) * warm.cov + cfg.cov_reset_blend * init_cov;
            }
            plan = optimize_from(x, scene, nm, p, cfg.opt, d,
                                 derive_seed(rng_seed, {1, static_cast<std::uint64_t>(t)}));
        } catch (const std::exception& e) {
            log.status = EpisodeStatus::Aborted;
            log.abort_reason = e.what();
            return log;
        }
        warm.mean = Eigen::Vector2d(plan.best.setpoint.v_set, plan.best.setpoint.d_set);
        warm.cov = plan.final_dist.cov;
        have_warm = true;

        // Apply the first control under a fresh true-noise draw.
        double a0 = plan.controls.a.front();
        double th0 = plan.controls.theta.front();
        Rng noise_rng(derive_seed(rng_seed, {2, static_cast<std::uint64_t>(t)}));
        double eps_a = sample_acc_noise(a0, nm, noise_rng);
        double eps_th = sample_steer_noise(th0, nm, noise_rng);
        x = step(x, a0 + eps_a, th0 + eps_th, p);

        EpisodeStep st;
        st.a = a0 + eps_a;
        st.theta = th0 + eps_th;
        st.state = x;
        st.plan_risk = plan.best.risk;
        st.plan_total = plan.best.total;
        st.collision = state_in_collision(x, scene);
        double lane_excess = std::max({0.0, x.d - scene.d_ub, scene.d_lb - x.d});
        st.lane_violation = lane_excess * x.v * p.dt;  // arc-length weighted
        log.violation_meters += st.lane_violation;
        log.steps.push_back(st);

        if (st.collision) {
            log.status = EpisodeStatus::Collided;
            return log;
        }
        if (x.s >= route_length) {
            log.status = EpisodeStatus::ReachedGoal;
            return log;
        }
    }
    log.status = EpisodeStatus::MaxSteps;
    return log;
}

MetricsReport compute_metrics(const std::vector<EpisodeLog>& logs, double route_length) {
    MetricsReport rep;
    double violation_acc = 0.0, avg_acc = 0.0, max_acc = 0.0;
    int collided = 0;
    for (const EpisodeLog& log : logs) {
        if (log.status == EpisodeStatus::Aborted) continue;
        ++rep.episodes;
        if (log.status == EpisodeStatus::Collided) ++collided;
        violation_acc += 100.0 * log.violation_meters / route_length;
        double speed_sum = 0.0, speed_max = 0.0;
        for (const EpisodeStep& st : log.steps) {
            speed_sum += st.state.v;
            speed_max = std::max(speed_max, st.state.v);
        }
        avg_acc += log.steps.empty() ? 0.0 : speed_sum / static_cast<double>(log.steps.size());
        max_acc += speed_max;
    }
    if (rep.episodes == 0) throw std::invalid_argument("compute_metrics: no usable episodes");
    rep.collision_pct = 100.0 * collided / rep.episodes;
    rep.lane_violation_pct = violation_acc / rep.episodes;
    rep.avg_speed = avg_acc / rep.episodes;
    rep.max_speed = max_acc / rep.episodes;
    return rep;
}

}  // namespace riskmmd
