#pragma once

#include <Eigen/Dense>

namespace riskmmd {

// Width of the Laplacian kernel, in the units of the L1 distance of its
// input space.
struct KernelWidth {
    double sigma = 1.0;
};

// Empirical distribution: rows of `points` are samples, `weights` sum to 1.
// Weights may be negative (reduced-set weights carry only a sum constraint).
struct WeightedSampleSet {
    Eigen::MatrixXd points;   // M x D
    Eigen::VectorXd weights;  // length M

    void validate() const;  // throws std::invalid_argument on violation
};

// K(z, z') = exp(-||z - z'||_1 / sigma). Symmetric, in (0, 1], equals 1 iff
// z == z'.
double laplacian_kernel(const Eigen::VectorXd& z, const Eigen::VectorXd& z_prime,
                        KernelWidth sigma);

// Pairwise L1 distances: entry (i, j) = ||A_i - B_j||_1.
Eigen::MatrixXd pairwise_l1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Entry (i, j) = laplacian_kernel(A_i, B_j, sigma).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              KernelWidth sigma);

// Elementwise exp(-dist / sigma) of a precomputed L1 distance matrix.
Eigen::MatrixXd kernel_from_distance(const Eigen::MatrixXd& dist, KernelWidth sigma);

// Biased (V-statistic) squared MMD:
//   wX' K(X,X) wX - 2 wX' K(X,Y) wY + wY' K(Y,Y) wY,
// clamped at 0 from below. Summation order is fixed: each term accumulates
// row-major over its kernel matrix, and the cross term canonicalizes the
// argument order (larger set outer, lexicographic tiebreak) so that
// mmd_squared(X,Y) == mmd_squared(Y,X) bit-for-bit.
double mmd_squared(const WeightedSampleSet& X, const WeightedSampleSet& Y,
                   KernelWidth sigma);

}  // namespace riskmmd
