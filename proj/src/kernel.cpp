#include "riskmmd/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace riskmmd {

namespace {

void check_sigma(KernelWidth sigma) {
    if (!(sigma.sigma > 0.0)) {
        throw std::invalid_argument("kernel width sigma must be > 0");
    }
}

// Row-major weighted sum over a kernel block between two sample sets.
double weighted_block_sum(const Eigen::MatrixXd& A, const Eigen::VectorXd& wa,
                          const Eigen::MatrixXd& B, const Eigen::VectorXd& wb,
                          KernelWidth sigma) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            double dist = (A.row(i) - B.row(j)).cwiseAbs().sum();
            acc += wa(i) * wb(j) * std::exp(-dist / sigma.sigma);
        }
    }
    return acc;
}

// True when B should be the outer set of the cross-term loop: more rows, or
// equal rows and lexicographically smaller flattened contents.
bool prefer_second(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows()) return B.rows() > A.rows();
    if (A.cols() != B.cols()) return B.cols() > A.cols();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (A(i, j) != B(i, j)) return B(i, j) < A(i, j);
        }
    }
    return false;
}

}  // namespace

void WeightedSampleSet::validate() const {
    if (points.rows() < 1 || points.cols() < 1) {
        throw std::invalid_argument("WeightedSampleSet requires M >= 1, D >= 1");
    }
    if (weights.size() != points.rows()) {
        throw std::invalid_argument("weights length must match sample count");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("weights must sum to 1 within 1e-9");
    }
}

double laplacian_kernel(const Eigen::VectorXd& z, const Eigen::VectorXd& z_prime,
                        KernelWidth sigma) {
    check_sigma(sigma);
    if (z.size() != z_prime.size()) {
        throw std::invalid_argument("laplacian_kernel: dimension mismatch");
    }
    return std::exp(-(z - z_prime).cwiseAbs().sum() / sigma.sigma);
}

Eigen::MatrixXd pairwise_l1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols()) {
        throw std::invalid_argument("pairwise_l1: dimension mismatch");
    }
    Eigen::MatrixXd dist(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            dist(i, j) = (A.row(i) - B.row(j)).cwiseAbs().sum();
        }
    }
    return dist;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              KernelWidth sigma) {
    check_sigma(sigma);
    return kernel_from_distance(pairwise_l1(A, B), sigma);
}

Eigen::MatrixXd kernel_from_distance(const Eigen::MatrixXd& dist, KernelWidth sigma) {
    check_sigma(sigma);
    return (-dist / sigma.sigma).array().exp();
}

double mmd_squared(const WeightedSampleSet& X, const WeightedSampleSet& Y,
                   KernelWidth sigma) {
    check_sigma(sigma);
    X.validate();
    Y.validate();
    if (X.points.cols() != Y.points.cols()) {
        throw std::invalid_argument("mmd_squared: dimension mismatch");
    }
    double sxx = weighted_block_sum(X.points, X.weights, X.points, X.weights, sigma);
    double syy = weighted_block_sum(Y.points, Y.weights, Y.points, Y.weights, sigma);
    double sxy = prefer_second(X.points, Y.points)
                     ? weighted_block_sum(Y.points, Y.weights, X.points, X.weights, sigma)
                     : weighted_block_sum(X.points, X.weights, Y.points, Y.weights, sigma);
    double value = (sxx + syy) - 2.0 * sxy;
    return value < 0.0 ? 0.0 : value;
}

}  // namespace riskmmd
