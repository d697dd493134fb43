#include "riskmmd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "riskmmd/parallel.hpp"
#include "riskmmd/rng.hpp"

namespace riskmmd {

double state_cost(const StateTrajectory& traj, const Scene& scene, double dt) {
    if (traj.size() < 4) throw std::invalid_argument("state_cost: horizon must be >= 3");
    std::size_t H = traj.size() - 1;
    double cost = 0.0;
    for (std::size_t k = 1; k <= H; ++k) {
        double dv = traj[k].v - scene.v_d;
        cost += dv * dv;
        cost += std::abs(traj[k].d - scene.d1) * std::abs(traj[k].d - scene.d2);
    }
    double dt2 = dt * dt;
    for (std::size_t k = 1; k + 1 <= H; ++k) {
        double sdd = (traj[k + 1].s - 2.0 * traj[k].s + traj[k - 1].s) / dt2;
        double ddd = (traj[k + 1].d - 2.0 * traj[k].d + traj[k - 1].d) / dt2;
        cost += sdd * sdd + ddd * ddd;
    }
    return cost;
}

namespace {

double control_magnitude(const ControlSequence& u) {
    double acc = 0.0;
    for (double a : u.a) acc += a * a;
    for (double th : u.theta) acc += th * th;
    return acc;
}

}  // namespace

CandidateScore score_candidate(const SetpointVector& b, const FrenetState& x0,
                               const Scene& scene, const NoiseModel& nm,
                               const VehicleParams& p, const OptimizerConfig& cfg,
                               std::uint64_t rng_seed) {
    CandidateScore score;
    score.setpoint = b;
    Profiles prof = expand_trajectory(b, x0, p);
    score.controls = flatness_controls(prof, p);
    score.control_cost = control_magnitude(score.controls);

    switch (cfg.risk_kind) {
        case RiskKind::MMD: {
            RolloutBatch batch =
                rollout_batch(x0, score.controls, nm, p, cfg.N, derive_seed(rng_seed, {1}));
            DistillConfig dcfg = cfg.distill;
            dcfg.seed = derive_seed(rng_seed, {2});
            ReducedSet rs;
            try {
                rs = distill(batch.positions, cfg.N, dcfg);
            } catch (const std::runtime_error&) {
                score.failed = true;
                score.total = std::numeric_limits<double>::infinity();
                return score;
            }
            Eigen::VectorXd residuals(cfg.N);
            double cost_acc = 0.0;
            score.rollout_h.reserve(rs.indices.size());
            for (int l = 0; l < cfg.N; ++l) {
                const StateTrajectory& traj =
                    batch.trajectories[static_cast<std::size_t>(rs.indices[l])];
                double h = constraint_h(traj, scene, cfg.include_lane);
                score.rollout_h.push_back(h);
                residuals(l) = residual(h);
                cost_acc += state_cost(traj, scene, p.dt);
            }
            score.risk = risk_mmd(residuals, rs.beta, {cfg.residual_sigma}, cfg.dirac,
                                  derive_seed(rng_seed, {3}));
            score.expected_cost = cost_acc / cfg.N;
            break;
        }
        case RiskKind::CVaR: {
            // Only N plain rollouts here; the reduced-set machinery does not
            // apply to the CVaR baseline.
            Eigen::VectorXd residuals(cfg.N);
            double cost_acc = 0.0;
            for (int i = 0; i < cfg.N; ++i) {
                std::uint64_t sub = derive_seed(rng_seed, {4, static_cast<std::uint64_t>(i)});
                NoiseDraw draw = sample_noise(score.controls, nm, sub);
                Rng rng(derive_seed(sub, {3}));
                FrenetState x = perturb_initial_state(x0, p, rng);
                StateTrajectory traj = rollout(x, score.controls, draw.eps_a, draw.eps_theta, p);
                double h = constraint_h(traj, scene, cfg.include_lane);
                score.rollout_h.push_back(h);
                residuals(i) = residual(h);
                cost_acc += state_cost(traj, scene, p.dt);
            }
            score.risk = risk_cvar(residuals, cfg.cvar_alpha);
            score.expected_cost = cost_acc / cfg.N;
            break;
        }
        case RiskKind::None: {
            std::vector<double> zeros(score.controls.a.size(), 0.0);
            StateTrajectory traj = rollout(x0, score.controls, zeros, zeros, p);
            score.rollout_h.push_back(constraint_h(traj, scene, cfg.include_lane));
            score.risk = 0.0;
            score.expected_cost = state_cost(traj, scene, p.dt);
            break;
        }
    }
    score.total = cfg.w1 * score.expected_cost + cfg.w2 * score.risk +
                  cfg.w3 * score.control_cost;
    return score;
}

SamplingDistribution update_distribution(const SamplingDistribution& dist,
                                         const std::vector<SetpointVector>& elite_b,
                                         const std::vector<double>& elite_cost,
                                         double gamma, double eta, double sigma_floor) {
    if (elite_b.empty() || elite_b.size() != elite_cost.size()) {
        throw std::invalid_argument("update_distribution: invalid elite set");
    }
    if (eta == 0.0) return dist;

    double c_min = *std::min_element(elite_cost.begin(), elite_cost.end());
    std::size_t ne = elite_b.size();
    Eigen::VectorXd t(ne);
    for (std::size_t q = 0; q < ne; ++q) t(q) = std::exp(-(elite_cost[q] - c_min) / gamma);
    double t_sum = t.sum();

    Eigen::Vector2d weighted_mean = Eigen::Vector2d::Zero();
    for (std::size_t q = 0; q < ne; ++q) {
        weighted_mean += t(q) * Eigen::Vector2d(elite_b[q].v_set, elite_b[q].d_set);
    }
    weighted_mean /= t_sum;

    SamplingDistribution next;
    next.mean = (1.0 - eta) * dist.mean + eta * weighted_mean;

    Eigen::Matrix2d weighted_cov = Eigen::Matrix2d::Zero();
    for (std::size_t q = 0; q < ne; ++q) {
        Eigen::Vector2d diff =
            Eigen::Vector2d(elite_b[q].v_set, elite_b[q].d_set) - next.mean;
        weighted_cov += t(q) * diff * diff.transpose();
    }
    weighted_cov /= t_sum;
    Eigen::Matrix2d cov = (1.0 - eta) * dist.cov + eta * weighted_cov;

    // Symmetrize and floor the spectrum.
    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    Eigen::Vector2d vals = eig.eigenvalues().cwiseMax(sigma_floor);
    next.cov = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
    return next;
}

OptimizeResult optimize(const FrenetState& x0, const Scene& scene, const NoiseModel& nm,
                        const VehicleParams& p, const OptimizerConfig& cfg,
                        std::uint64_t rng_seed) {
    SamplingDistribution dist;
    dist.mean = Eigen::Vector2d(scene.v_d, x0.d);
    dist.cov = Eigen::Vector2d(cfg.init_std_v * cfg.init_std_v,
                               cfg.init_std_d * cfg.init_std_d)
                   .asDiagonal();
    return optimize_from(x0, scene, nm, p, cfg, dist, rng_seed);
}

OptimizeResult optimize_from(const FrenetState& x0, const Scene& scene,
                             const NoiseModel& nm, const VehicleParams& p,
                             const OptimizerConfig& cfg, const SamplingDistribution& init,
                             std::uint64_t rng_seed) {
    if (cfg.n_e > cfg.n_c || cfg.n_c > cfg.n || cfg.iters < 1) {
        throw std::invalid_argument("optimize: require n_e <= n_c <= n and iters >= 1");
    }

    SamplingDistribution dist = init;
    OptimizeResult result;
    double best_total = std::numeric_limits<double>::infinity();

    for (int m = 0; m < cfg.iters; ++m) {
        std::vector<SetpointVector> batch = sample_setpoints(
            dist, cfg.n, p.v_max, derive_seed(rng_seed, {0xba7c, static_cast<std::uint64_t>(m)}));
        std::vector<CandidateScore> scores(static_cast<std::size_t>(cfg.n));
        parallel_for(static_cast<std::size_t>(cfg.n), [&](std::size_t q) {
            scores[q] = score_candidate(
                batch[q], x0, scene, nm, p, cfg,
                derive_seed(rng_seed, {0x5c0 + static_cast<std::uint64_t>(m), q}));
        });
        for (const CandidateScore& s : scores) {
            if (s.failed) ++result.failed_candidates;
        }

        // ConstraintEliteSet: n_c lowest-risk candidates (stable under ties).
        std::vector<int> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const auto& sa = scores[static_cast<std::size_t>(a)];
            const auto& sb = scores[static_cast<std::size_t>(b)];
            if (sa.failed != sb.failed) return !sa.failed;
            return sa.risk < sb.risk;
        });
        int nc = std::min<int>(cfg.n_c, static_cast<int>(order.size()));
        std::vector<int> constraint_elite(order.begin(), order.begin() + nc);

        // EliteSet: n_e lowest total cost among the constraint elites.
        std::stable_sort(constraint_elite.begin(), constraint_elite.end(), [&](int a, int b) {
            return scores[static_cast<std::size_t>(a)].total <
                   scores[static_cast<std::size_t>(b)].total;
        });
        int ne = std::min<int>(cfg.n_e, nc);
        std::vector<SetpointVector> elite_b;
        std::vector<double> elite_cost;
        double elite_total_acc = 0.0;
        int usable = 0;
        for (int e = 0; e < ne; ++e) {
            const CandidateScore& s = scores[static_cast<std::size_t>(constraint_elite[e])];
            if (s.failed) continue;
            elite_b.push_back(s.setpoint);
            elite_cost.push_back(s.total);
            elite_total_acc += s.total;
            ++usable;
            if (s.total < best_total) {
                best_total = s.total;
                result.best = s;
            }
        }
        if (usable == 0) {
            throw std::runtime_error("optimize: every candidate in the batch failed");
        }
        dist = update_distribution(dist, elite_b, elite_cost, cfg.gamma, cfg.eta,
                                   cfg.sigma_floor);

        IterationTrace tr;
        tr.best_total = best_total;
        tr.mean_elite_total = elite_total_acc / usable;
        tr.best_risk = result.best.risk;
        result.trace.push_back(tr);
    }

    result.controls = result.best.controls;
    result.final_dist = dist;
    return result;
}

}  // namespace riskmmd
