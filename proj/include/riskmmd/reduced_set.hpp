#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "riskmmd/kernel.hpp"

namespace riskmmd {

// Result of distilling the full rollout set: N selected row indices, their
// weights (sum to 1, may be negative), the optimized kernel width, and the
// achieved embedding discrepancy (outer MMD^2 objective).
struct ReducedSet {
    std::vector<int> indices;
    Eigen::VectorXd beta;
    KernelWidth sigma;
    double discrepancy = 0.0;
    int failed_candidates = 0;  // inner-QP failures discarded during search
};

struct DistillConfig {
    int cem_samples = 50;
    int cem_iters = 8;
    double elite_frac = 0.2;
    // Kernel-width search range. Non-positive bounds are replaced by
    // (0.75 m, 1.5 m) where m is the median pairwise L1 distance of the
    // rows. The range is kept tight around the median heuristic on purpose:
    // the outer discrepancy scales roughly like 1/sigma, so a wide range
    // lets the search trade subset quality for kernel width and the row
    // selection degenerates to noise.
    double sigma_low = 0.0;
    double sigma_high = 0.0;
    double lambda_init_std = 1.0;
    double qp_ridge = 1e-6;
    std::uint64_t seed = 0;
};

// Indices of the N rows with largest |lambda_t|: the last N positions of a
// stable ascending sort of |lambda|. Among equal magnitudes the smaller
// original index sorts first.
std::vector<int> select_reduced_rows(const Eigen::VectorXd& lambda,
                                     Eigen::Index rows, int N);

// Closed-form solve of the inner weight problem
//   min_beta  beta' K_rr beta - 2 beta' q   s.t.  1' beta = 1,
// with K_rr the ridge-regularized kernel of the selected rows and
// q_l = mean_t K(row_l, O_t), via the KKT system
//   [2 K_rr  1; 1'  0] [beta; nu] = [2 q; 1].
// `objective` is the full outer MMD^2 (unridged, including the constant
// full-set term) at the returned beta.
struct InnerQpResult {
    Eigen::VectorXd beta;
    double objective = 0.0;
};
InnerQpResult solve_inner_qp(const Eigen::MatrixXd& O, const std::vector<int>& indices,
                             KernelWidth sigma, double ridge);

// Same solve on a precomputed full pairwise L1 distance matrix (distill's
// hot path; exactly the math of solve_inner_qp).
InnerQpResult solve_inner_qp_from_dist(const Eigen::MatrixXd& dist,
                                       const std::vector<int>& indices,
                                       KernelWidth sigma, double ridge);

// CEM over (lambda, sigma) with the inner QP solved per candidate; returns
// the best (indices, beta, sigma) ever seen. Deterministic given cfg.seed.
ReducedSet distill(const Eigen::MatrixXd& O, int N, const DistillConfig& cfg);

// Median pairwise L1 distance between rows (0 pairs or all-equal rows -> 1).
double median_pairwise_l1(const Eigen::MatrixXd& O);

// Outer MMD^2 between the full uniform embedding and the weighted reduced
// embedding, on a precomputed pairwise L1 distance matrix.
double outer_objective(const Eigen::MatrixXd& dist, const std::vector<int>& indices,
                       const Eigen::VectorXd& beta, KernelWidth sigma);

// Best outer objective over `n_subsets` seeded random N-subsets with uniform
// weights 1/N, minimized over a log-spaced sigma grid spanning the same
// range distill would use. The comparison baseline for distill.
double random_subset_baseline(const Eigen::MatrixXd& O, int N, int n_subsets,
                              std::uint64_t seed, int sigma_grid = 16,
                              double sigma_low = 0.0, double sigma_high = 0.0);

}  // namespace riskmmd
