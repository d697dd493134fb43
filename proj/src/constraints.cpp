#include "riskmmd/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskmmd/parallel.hpp"
#include "riskmmd/rng.hpp"

namespace riskmmd {

double constraint_h(const StateTrajectory& traj, const Scene& scene, bool include_lane) {
    if (traj.size() < 2) throw std::invalid_argument("constraint_h: empty trajectory");
    std::size_t H = traj.size() - 1;
    for (const Obstacle& obs : scene.obstacles) {
        if (obs.centers.size() != 1 && obs.centers.size() != H) {
            throw std::invalid_argument("constraint_h: obstacle horizon mismatch");
        }
    }
    double h = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= H; ++k) {
        const FrenetState& x = traj[k];
        double hk = -std::numeric_limits<double>::infinity();
        for (const Obstacle& obs : scene.obstacles) {
            const Eigen::Vector2d& c = obs.center_at(k - 1);
            double ds = (x.s - c.x()) / obs.a_e;
            double dd = (x.d - c.y()) / obs.b_e;
            hk = std::max(hk, 1.0 - ds * ds - dd * dd);
        }
        if (include_lane) {
            hk = std::max(hk, std::max(x.d - scene.d_ub, scene.d_lb - x.d));
        }
        h = std::max(h, hk);
    }
    return h;
}

bool state_in_collision(const FrenetState& x, const Scene& scene, std::size_t k) {
    for (const Obstacle& obs : scene.obstacles) {
        const Eigen::Vector2d& c =
            obs.centers.size() == 1 ? obs.centers[0]
                                    : obs.centers[std::min(k, obs.centers.size() - 1)];
        double ds = (x.s - c.x()) / obs.a_e;
        double dd = (x.d - c.y()) / obs.b_e;
        if (1.0 - ds * ds - dd * dd > 0.0) return true;
    }
    return false;
}

double risk_mmd(const Eigen::VectorXd& residuals, const Eigen::VectorXd& beta,
                KernelWidth sigma, const DiracConfig& dc, std::uint64_t rng_seed) {
    if (residuals.size() != beta.size() || residuals.size() == 0) {
        throw std::invalid_argument("risk_mmd: residual/weight size mismatch");
    }
    if (dc.n_samples < 1 || dc.epsilon_std < 0.0) {
        throw std::invalid_argument("risk_mmd: invalid Dirac config");
    }

    WeightedSampleSet X;
    X.points = residuals;
    X.weights = beta;

    WeightedSampleSet delta;
    delta.points.resize(dc.n_samples, 1);
    delta.weights = Eigen::VectorXd::Constant(dc.n_samples, 1.0 / dc.n_samples);
    Rng rng(derive_seed(rng_seed, {0xd17ac}));
    for (int m = 0; m < dc.n_samples; ++m) {
        delta.points(m, 0) = dc.epsilon_std > 0.0 ? dc.epsilon_std * rng.normal() : 0.0;
    }
    return mmd_squared(X, delta, sigma);
}

double risk_cvar(const Eigen::VectorXd& residuals, double alpha) {
    if (residuals.size() == 0) throw std::invalid_argument("risk_cvar: empty input");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("risk_cvar: alpha out of (0,1)");
    std::vector<double> sorted(residuals.data(), residuals.data() + residuals.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    // Small deflation guards against FP slop in (1 - alpha) * n landing just
    // above an integer (e.g. 0.3 * 10 -> 3.0000000000000004).
    auto count = static_cast<std::size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(sorted.size()) - 1e-9));
    count = std::max<std::size_t>(1, std::min(count, sorted.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += sorted[i];
    return acc / static_cast<double>(count);
}

double ground_truth_collision_rate(const FrenetState& x0, const ControlSequence& u,
                                   const Scene& scene, const NoiseModel& nm,
                                   const VehicleParams& p, int M,
                                   std::uint64_t rng_seed) {
    if (M < 1) throw std::invalid_argument("ground_truth_collision_rate: M must be >= 1");
    std::vector<int> collided(static_cast<std::size_t>(M), 0);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
        std::uint64_t sub = derive_seed(rng_seed, {0x67c0, m});
        NoiseDraw draw = sample_noise(u, nm, sub);
        Rng rng(derive_seed(sub, {3}));
        FrenetState x = perturb_initial_state(x0, p, rng);
        StateTrajectory traj = rollout(x, u, draw.eps_a, draw.eps_theta, p);
        collided[m] = constraint_h(traj, scene, /*include_lane=*/false) > 0.0 ? 1 : 0;
    });
    int total = 0;
    for (int c : collided) total += c;
    return static_cast<double>(total) / static_cast<double>(M);
}

}  // namespace riskmmd
