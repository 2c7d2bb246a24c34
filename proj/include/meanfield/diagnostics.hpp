#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace meanfield {

// Sample moments with batch-means standard errors for the mean.
struct MomentSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;      // unbiased (n-1 denominator)
    Eigen::VectorXd se_mean;  // non-overlapping batch means, sd/sqrt(B)
    int n_samples = 0;
    int n_batches = 0;
};

// Requires n_samples >= n_batches >= 8. Batches are consecutive and equal
// sized; a remainder of fewer than n_batches samples at the end is dropped
// from the standard errors (not from mean/cov).
MomentSummary empirical_moments(const std::vector<Eigen::VectorXd>& samples, int n_batches);

// Exact squared 2-Wasserstein distance between two equal-size point clouds:
// (1/m) min over permutations of sum |a_i - b_{perm(i)}|^2, solved by the
// Kuhn-Munkres / shortest-augmenting-path assignment method. m <= 2048;
// subsample larger clouds before calling.
double empirical_w2sq(const std::vector<Eigen::VectorXd>& a,
                      const std::vector<Eigen::VectorXd>& b);

// First-k-particle blocks of each state, flattened to k*d vectors. With
// relabel = true every state gets an independent uniformly random relabeling
// first; by exchangeability this leaves the law unchanged and reduces
// variance of marginal statistics.
std::vector<Eigen::VectorXd> extract_marginal(const std::vector<Eigen::MatrixXd>& states, int k,
                                              bool relabel = false, std::uint64_t seed = 0);

// Least squares of log(y) on log(x).
struct ScalingFit {
    double slope;
    double intercept;
    double r_squared;
};
ScalingFit scaling_exponent(const std::vector<double>& xs, const std::vector<double>& ys);

struct BoundReport {
    double ratio;
    bool satisfied;
};
BoundReport bound_report(double measured, double bound);

}  // namespace meanfield
