#include "riskmmd/frenet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskmmd/rng.hpp"

namespace riskmmd {

namespace {
constexpr double kVEps = 0.1;  // low-speed steering singularity guard (m/s)
}

std::vector<SetpointVector> sample_setpoints(const SamplingDistribution& dist, int n,
                                             double v_max, std::uint64_t rng_seed) {
    Eigen::LLT<Eigen::Matrix2d> llt(dist.cov);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("sample_setpoints: covariance not positive definite");
    }
    Eigen::Matrix2d L = llt.matrixL();
    std::vector<SetpointVector> out(static_cast<std::size_t>(n));
    Rng rng(derive_seed(rng_seed, {0x5e7}));
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d z(rng.normal(), rng.normal());
        Eigen::Vector2d b = dist.mean + L * z;
        out[static_cast<std::size_t>(i)] = {std::clamp(b(0), 0.0, v_max), b(1)};
    }
    return out;
}

Profiles expand_trajectory(const SetpointVector& b, const FrenetState& x0,
                           const VehicleParams& p) {
    if (p.horizon < 2) throw std::invalid_argument("expand_trajectory: horizon must be >= 2");
    int H = p.horizon;
    double T = H * p.dt;
    double d0 = x0.d;
    double dd0 = x0.v * std::sin(x0.psi);  // lateral rate at t = 0

    // Quintic lateral coefficients: c0 = d0, c1 = dd0, c2 = 0; end conditions
    // (d_set, 0, 0) give a 3x3 system for (c3, c4, c5).
    double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
    Eigen::Matrix3d A;
    A << T3, T4, T5,
         3 * T2, 4 * T3, 5 * T4,
         6 * T, 12 * T2, 20 * T3;
    Eigen::Vector3d rhs(b.d_set - d0 - dd0 * T, -dd0, 0.0);
    Eigen::Vector3d c = A.partialPivLu().solve(rhs);
    double c3 = c(0), c4 = c(1), c5 = c(2);

    double v0 = x0.v;
    double dv = b.v_set - v0;

    Profiles prof;
    prof.s.resize(H + 1);
    prof.d.resize(H + 1);
    prof.v.resize(H + 1);
    prof.d_dot.resize(H + 1);
    for (int k = 0; k <= H; ++k) {
        double t = k * p.dt;
        double tau = t / T;
        prof.d[k] = d0 + dd0 * t + c3 * t * t * t + c4 * t * t * t * t +
                    c5 * t * t * t * t * t;
        prof.d_dot[k] = dd0 + 3 * c3 * t * t + 4 * c4 * t * t * t + 5 * c5 * t * t * t * t;
        // Cubic speed profile v(tau) = v0 + dv (3 tau^2 - 2 tau^3) and its
        // exact integral for s.
        prof.v[k] = v0 + dv * (3 * tau * tau - 2 * tau * tau * tau);
        prof.s[k] = x0.s + v0 * t + dv * T * (tau * tau * tau - 0.5 * tau * tau * tau * tau);
    }
    return prof;
}

ControlSequence flatness_controls(const Profiles& profiles, const VehicleParams& p) {
    int H = p.horizon;
    if (static_cast<int>(profiles.v.size()) != H + 1) {
        throw std::invalid_argument("flatness_controls: profile/horizon mismatch");
    }
    std::vector<double> psi(H + 1);
    for (int k = 0; k <= H; ++k) {
        psi[k] = std::atan2(profiles.d_dot[k], std::max(profiles.v[k], kVEps));
    }
    ControlSequence u;
    u.a.resize(H);
    u.theta.resize(H);
    for (int k = 0; k < H; ++k) {
        double a = (profiles.v[k + 1] - profiles.v[k]) / p.dt;
        double psi_dot = (psi[k + 1] - psi[k]) / p.dt;
        double theta =
            std::atan(p.wheelbase * psi_dot / std::max(profiles.v[k], kVEps));
        u.a[k] = std::clamp(a, p.a_min, p.a_max);
        u.theta[k] = std::clamp(theta, p.theta_min, p.theta_max);
    }
    return u;
}

}  // namespace riskmmd
