#pragma once

#include <Eigen/Dense>

namespace meanfield {

// The fully solvable quadratic instance: V(x) = x'Ax/2, W(x) = (lambda/2)|x|^2
// on N particles, with the first k particles as the marginal of interest.
struct GaussianSpec {
    Eigen::MatrixXd a;  // SPD, d x d
    double lambda = 0.0;
    double sigma = 1.4142135623730951;
    int n_particles = 2;
    int k = 1;

    int dim() const { return static_cast<int>(a.rows()); }
    void validate() const;
};

struct GaussianDist {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// C = N I_N - 1 1', the interaction coupling pattern of the particle system.
Eigen::MatrixXd interaction_matrix(int n);

// H = I_N (x) A + (lambda/(N-1)) C (x) I_d. The drift of the particle system
// is -H x and the stationary law is N(0, (sigma^2/2) H^{-1}).
Eigen::MatrixXd precision_full(const GaussianSpec& spec);

// Sigma_1 = (sigma^2/2) H^{-1}, by dense solve. This defining inverse is the
// authoritative route; every spectral shortcut below is tested against it.
Eigen::MatrixXd stationary_cov_full(const GaussianSpec& spec);

// Sigma_2 = (sigma^2/2) (A + lambda I)^{-1}, the mean-field covariance.
Eigen::MatrixXd mean_field_cov(const GaussianSpec& spec);

// N(0, top-left dk x dk block of Sigma_1): the k-particle marginal mu^{1:k}.
GaussianDist marginal_law(const GaussianSpec& spec, int k);

// N(0, I_k (x) Sigma_2): the product law pi^{(x)k}.
GaussianDist product_law(const GaussianSpec& spec, int k);

// KL(p || q) = (  -log det(q.cov^{-1} p.cov) - dim + tr(q.cov^{-1} p.cov)
//              + (mean difference)' q.cov^{-1} (mean difference)  ) / 2.
double kl_gaussian(const GaussianDist& p, const GaussianDist& q);

// KL(mu^{1:k} || pi^{(x)k}) in O(d^3 + d k) through the eigenvalues s_i of A.
// With eps = lambda/(N-1) and d_i = s_i + lambda + eps, the spectrum of
// M = I - Sigma_{2,k}^{-1} Sigma_{1,k} consists, for each i, of
//   eta_i{+} = eps/d_i - k eps (s_i + lambda) / (d_i s_i)   (multiplicity 1)
//   eta_i{0} = eps/d_i                                      (multiplicity k-1)
// and KL = -(1/2) sum (log(1 - eta) + eta). All eta < 1; eta{+} may be < 0.
// Must agree with kl_gaussian over stationary_cov_full to 1e-9.
double kl_marginal_spectral(const GaussianSpec& spec);

// Bures-Wasserstein distance:
// sqrt( |mu_p - mu_q|^2 + tr(P + Q - 2 (Q^{1/2} P Q^{1/2})^{1/2}) ).
double w2_gaussian(const GaussianDist& p, const GaussianDist& q);

// Exact stationary covariance of the Euler-Maruyama chain
// X+ = X + h (-H X) + sigma sqrt(h) xi on the quadratic model: each eigenmode
// mu of H carries variance sigma^2 / (mu (2 - h mu)). Requires 0 < h mu < 2
// for every mode. The result also solves the discrete Lyapunov fixed point
// S = (I - hH) S (I - hH) + sigma^2 h I.
Eigen::MatrixXd lmc_stationary_cov(const GaussianSpec& spec, double h);

}  // namespace meanfield
