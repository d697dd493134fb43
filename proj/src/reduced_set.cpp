#include "riskmmd/reduced_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "riskmmd/rng.hpp"

namespace riskmmd {

std::vector<int> select_reduced_rows(const Eigen::VectorXd& lambda,
                                     Eigen::Index rows, int N) {
    if (lambda.size() != rows) {
        throw std::invalid_argument("select_reduced_rows: lambda length mismatch");
    }
    if (N < 1 || N > rows) {
        throw std::invalid_argument("select_reduced_rows: N out of range");
    }
    std::vector<int> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(lambda(a)) < std::abs(lambda(b));
    });
    return {order.end() - N, order.end()};
}

double median_pairwise_l1(const Eigen::MatrixXd& O) {
    std::vector<double> dists;
    for (Eigen::Index i = 0; i < O.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < O.rows(); ++j) {
            dists.push_back((O.row(i) - O.row(j)).cwiseAbs().sum());
        }
    }
    if (dists.empty()) return 1.0;
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    double m = dists[dists.size() / 2];
    return m > 0.0 ? m : 1.0;
}

double outer_objective(const Eigen::MatrixXd& dist, const std::vector<int>& indices,
                       const Eigen::VectorXd& beta, KernelWidth sigma) {
    Eigen::Index n2 = dist.rows();
    int N = static_cast<int>(indices.size());
    Eigen::MatrixXd K = kernel_from_distance(dist, sigma);
    double quad = 0.0, cross = 0.0;
    for (int l = 0; l < N; ++l) {
        for (int m = 0; m < N; ++m) quad += beta(l) * beta(m) * K(indices[l], indices[m]);
        cross += beta(l) * K.row(indices[l]).mean();
    }
    double full_term = K.sum() / (static_cast<double>(n2) * static_cast<double>(n2));
    return quad - 2.0 * cross + full_term;
}

double random_subset_baseline(const Eigen::MatrixXd& O, int N, int n_subsets,
                              std::uint64_t seed, int sigma_grid,
                              double sigma_low, double sigma_high) {
    Eigen::Index n2 = O.rows();
    if (N < 1 || N > n2) throw std::invalid_argument("random_subset_baseline: N out of range");
    Eigen::MatrixXd dist = pairwise_l1(O, O);
    double anchor = median_pairwise_l1(O);
    double lo = sigma_low > 0.0 ? sigma_low : 0.75 * anchor;
    double hi = sigma_high > 0.0 ? sigma_high : 1.5 * anchor;
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(N, 1.0 / N);

    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_subsets; ++s) {
        Rng rng(derive_seed(seed, {0x5b5, static_cast<std::uint64_t>(s)}));
        // Partial Fisher-Yates draw of N distinct indices.
        std::vector<int> pool(static_cast<std::size_t>(n2));
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<int> idx;
        for (int k = 0; k < N; ++k) {
            auto pick = static_cast<std::size_t>(rng.uniform() * (pool.size() - k)) + k;
            std::swap(pool[k], pool[std::min(pick, pool.size() - 1)]);
            idx.push_back(pool[k]);
        }
        for (int g = 0; g < sigma_grid; ++g) {
            double frac = sigma_grid > 1 ? static_cast<double>(g) / (sigma_grid - 1) : 0.5;
            KernelWidth sigma{std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo)))};
            best = std::min(best, outer_objective(dist, idx, beta, sigma));
        }
    }
    return std::max(0.0, best);
}

InnerQpResult solve_inner_qp_from_dist(const Eigen::MatrixXd& dist,
                                       const std::vector<int>& indices,
                                       KernelWidth sigma, double ridge) {
    if (!(ridge > 0.0)) throw std::invalid_argument("solve_inner_qp: ridge must be > 0");
    Eigen::Index n2 = dist.rows();
    int N = static_cast<int>(indices.size());
    for (int idx : indices) {
        if (idx < 0 || idx >= n2) throw std::invalid_argument("solve_inner_qp: index out of range");
    }

    Eigen::MatrixXd K = kernel_from_distance(dist, sigma);
    Eigen::MatrixXd K_rr(N, N);
    Eigen::VectorXd q(N);
    for (int l = 0; l < N; ++l) {
        for (int m = 0; m < N; ++m) K_rr(l, m) = K(indices[l], indices[m]);
        q(l) = K.row(indices[l]).mean();
    }

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(N + 1, N + 1);
    kkt.topLeftCorner(N, N) = 2.0 * (K_rr + ridge * Eigen::MatrixXd::Identity(N, N));
    kkt.topRightCorner(N, 1).setOnes();
    kkt.bottomLeftCorner(1, N).setOnes();
    Eigen::VectorXd rhs(N + 1);
    rhs.head(N) = 2.0 * q;
    rhs(N) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol = lu.solve(rhs);
    double residual = (kkt * sol - rhs).norm();
    if (!sol.allFinite() || residual > 1e-8 * (1.0 + rhs.norm())) {
        std::ostringstream msg;
        msg << "solve_inner_qp: KKT system singular after ridge (residual " << residual
            << ", rcond " << lu.rcond() << ")";
        throw std::runtime_error(msg.str());
    }

    InnerQpResult res;
    res.beta = sol.head(N);
    // Outer MMD^2 at beta, unridged, with the constant full-set term.
    double full_term = K.sum() / (static_cast<double>(n2) * static_cast<double>(n2));
    res.objective =
        res.beta.dot(K_rr * res.beta) - 2.0 * res.beta.dot(q) + full_term;
    return res;
}

InnerQpResult solve_inner_qp(const Eigen::MatrixXd& O, const std::vector<int>& indices,
                             KernelWidth sigma, double ridge) {
    return solve_inner_qp_from_dist(pairwise_l1(O, O), indices, sigma, ridge);
}

ReducedSet distill(const Eigen::MatrixXd& O, int N, const DistillConfig& cfg) {
    Eigen::Index n2 = O.rows();
    if (N < 1 || N > n2) throw std::invalid_argument("distill: N out of range");
    if (cfg.cem_samples < 1 || cfg.cem_iters < 1) {
        throw std::invalid_argument("distill: invalid CEM config");
    }

    Eigen::MatrixXd dist = pairwise_l1(O, O);
    double anchor = median_pairwise_l1(O);
    double sig_lo = cfg.sigma_low > 0.0 ? cfg.sigma_low : 0.75 * anchor;
    double sig_hi = cfg.sigma_high > 0.0 ? cfg.sigma_high : 1.5 * anchor;
    if (!(sig_lo < sig_hi)) throw std::invalid_argument("distill: sigma range empty");
    double log_lo = std::log(sig_lo), log_hi = std::log(sig_hi);

    Eigen::VectorXd lam_mean = Eigen::VectorXd::Zero(n2);
    Eigen::VectorXd lam_std = Eigen::VectorXd::Constant(n2, cfg.lambda_init_std);
    double lsig_mean = 0.5 * (log_lo + log_hi);
    double lsig_std = 0.25 * (log_hi - log_lo);

    ReducedSet best;
    best.discrepancy = std::numeric_limits<double>::infinity();
    int failures = 0;

    int elite_count = std::max(1, static_cast<int>(std::lround(cfg.elite_frac * cfg.cem_samples)));

    struct Candidate {
        Eigen::VectorXd lambda;
        double log_sigma = 0.0;
        double objective = std::numeric_limits<double>::infinity();
    };

    for (int iter = 0; iter < cfg.cem_iters; ++iter) {
        std::vector<Candidate> cands(static_cast<std::size_t>(cfg.cem_samples));
        for (int c = 0; c < cfg.cem_samples; ++c) {
            Candidate& cand = cands[static_cast<std::size_t>(c)];
            Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter),
                                           static_cast<std::uint64_t>(c)}));
            cand.lambda.resize(n2);
            for (Eigen::Index t = 0; t < n2; ++t) {
                cand.lambda(t) = lam_mean(t) + lam_std(t) * rng.normal();
            }
            cand.log_sigma =
                std::clamp(lsig_mean + lsig_std * rng.normal(), log_lo, log_hi);
            KernelWidth sigma{std::exp(cand.log_sigma)};
            std::vector<int> idx = select_reduced_rows(cand.lambda, n2, N);
            try {
                InnerQpResult qp = solve_inner_qp_from_dist(dist, idx, sigma, cfg.qp_ridge);
                cand.objective = qp.objective;
                if (qp.objective < best.discrepancy) {
                    best.indices = idx;
                    best.beta = qp.beta;
                    best.sigma = sigma;
                    best.discrepancy = qp.objective;
                }
            } catch (const std::runtime_error&) {
                ++failures;
            }
        }

        // Refit sampling distribution on the elite fraction.
        std::vector<int> order(cands.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return cands[static_cast<std::size_t>(a)].objective <
                   cands[static_cast<std::size_t>(b)].objective;
        });
        int usable = 0;
        for (int id : order) {
            if (std::isfinite(cands[static_cast<std::size_t>(id)].objective)) ++usable;
        }
        if (usable == 0) continue;
        int ne = std::min(elite_count, usable);

        Eigen::VectorXd new_lam_mean = Eigen::VectorXd::Zero(n2);
        double new_lsig_mean = 0.0;
        for (int e = 0; e < ne; ++e) {
            const Candidate& cand = cands[static_cast<std::size_t>(order[e])];
            new_lam_mean += cand.lambda;
            new_lsig_mean += cand.log_sigma;
        }
        new_lam_mean /= ne;
        new_lsig_mean /= ne;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(n2);
        double lsig_var = 0.0;
        for (int e = 0; e < ne; ++e) {
            const Candidate& cand = cands[static_cast<std::size_t>(order[e])];
            var += (cand.lambda - new_lam_mean).cwiseAbs2();
            lsig_var += (cand.log_sigma - new_lsig_mean) * (cand.log_sigma - new_lsig_mean);
        }
        lam_mean = new_lam_mean;
        lam_std = (var / ne).cwiseSqrt().cwiseMax(1e-6);
        lsig_mean = new_lsig_mean;
        lsig_std = std::max(std::sqrt(lsig_var / ne), 1e-6);
    }

    if (!std::isfinite(best.discrepancy)) {
        throw std::runtime_error("distill: all CEM candidates failed the inner QP");
    }
    best.discrepancy = std::max(0.0, best.discrepancy);
    best.failed_candidates = failures;
    return best;
}

}  // namespace riskmmd
