#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "riskmmd/vehicle.hpp"

namespace riskmmd {

// Low-dimensional trajectory parameterization: terminal speed and terminal
// lateral-offset setpoints.
struct SetpointVector {
    double v_set = 0.0;
    double d_set = 0.0;
};

// Gaussian over setpoint vectors, iterated by the sampling optimizer.
struct SamplingDistribution {
    Eigen::Vector2d mean{0.0, 0.0};        // (v_set, d_set)
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

// Desired profiles over the horizon, sampled at t_k = k*dt, k = 0..H.
// d* is a quintic from (d0, d_dot0, 0) to (d_set, 0, 0); v* a cubic from
// (v0, 0) to (v_set, 0); s* the analytic integral of v*. d_dot holds the
// analytic derivative of d*.
struct Profiles {
    std::vector<double> s, d, v, d_dot;
};

// n i.i.d. draws from the distribution; v_set clipped to [0, v_max].
// Throws on a non-positive-definite covariance.
std::vector<SetpointVector> sample_setpoints(const SamplingDistribution& dist, int n,
                                             double v_max, std::uint64_t rng_seed);

Profiles expand_trajectory(const SetpointVector& b, const FrenetState& x0,
                           const VehicleParams& p);

// Differential-flatness recovery of bounded controls from the profiles:
//   a_k     = (v*(k+1) - v*(k)) / dt
//   psi*(k) = atan2(d_dot*(k), max(v*(k), v_eps))
//   theta_k = atan(L * psi_dot*(k) / max(v*(k), v_eps))
// both clipped to the control bounds.
ControlSequence flatness_controls(const Profiles& profiles, const VehicleParams& p);

}  // namespace riskmmd
