#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "meanfield/particle_state.hpp"

namespace meanfield {

// Thrown when a potential or gradient comes back non-finite; carries the
// offending particle index when there is one.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, int particle = -1)
        : std::runtime_error(what), particle_index(particle) {}
    int particle_index;
};

// Regularity metadata in the sense of uniform convexity / smoothness of the
// potentials themselves (not of log mu). User-declared, never estimated,
// except for Gaussian constructors where the values are exact.
struct PairwiseConstants {
    std::optional<double> alpha_v, beta_v, alpha_w, beta_w;
    std::optional<double> osc_v1, osc_w1;
};

// Confinement V, even interaction W, diffusion scale sigma.
struct PairwiseModel {
    std::string name = "pairwise";
    std::function<double(const Eigen::VectorXd&)> v;
    std::function<double(const Eigen::VectorXd&)> w;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_v;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_w;
    double sigma = 1.4142135623730951;  // sigma^2 = 2
    PairwiseConstants constants;
};

// Functional F0 on empirical measures with its intrinsic gradient
// w2_grad(rho, point), weight decay lambda, diffusion scale sigma.
// `w2_grad_all`, when set, evaluates the intrinsic gradient at every particle
// of the state in one pass (same values as w2_grad row by row, but lets the
// implementation share work such as network predictions).
struct GeneralModel {
    std::string name = "general";
    std::function<double(const ParticleState&)> f0;
    std::function<Eigen::VectorXd(const ParticleState&, const Eigen::VectorXd&)> w2_grad;
    std::function<Eigen::MatrixXd(const ParticleState&)> w2_grad_all;
    double lambda = 0.0;
    double sigma = 1.4142135623730951;
    std::optional<double> beta;     // smoothness of F0 in the intrinsic sense
    std::optional<double> b_bound;  // uniform bound on the intrinsic gradient
};

// Row i of the drift: -(grad V(x^i) + (1/(N-1)) sum_{j != i} grad W(x^i - x^j)).
// Requires N >= 2; the neighbor average is empty otherwise.
Eigen::MatrixXd pairwise_drift(const PairwiseModel& model, const ParticleState& state);

// Unnormalized log density of the N-particle stationary measure:
// -(2/sigma^2) sum_i V(x^i) - (1/(sigma^2 (N-1))) sum_{i != j} W(x^i - x^j).
double pairwise_log_density(const PairwiseModel& model, const ParticleState& state);

// grad log mu^{1:N} = (2/sigma^2) * drift, exactly.
Eigen::MatrixXd pairwise_score(const PairwiseModel& model, const ParticleState& state);

// Row i: -w2_grad(rho_x, x^i) - lambda x^i.
Eigen::MatrixXd general_drift(const GeneralModel& model, const ParticleState& state);

// -(2N/sigma^2) F0(rho_x) - (lambda/sigma^2) |x|^2.
double general_log_density(const GeneralModel& model, const ParticleState& state);

Eigen::MatrixXd general_score(const GeneralModel& model, const ParticleState& state);

// Serial reference kernels. The public entry points above run the OpenMP
// versions; these stay around so tests and the benchmark can compare, and the
// comparison must be bit-exact at any worker count.
Eigen::MatrixXd pairwise_drift_serial(const PairwiseModel& model, const Eigen::MatrixXd& x);
double pairwise_log_density_serial(const PairwiseModel& model, const Eigen::MatrixXd& x);

// V(x) = x'Ax/2, W(x) = (lambda/2)|x|^2, with exact constants
// alpha_V = lambda_min(A), beta_V = lambda_max(A), alpha_W = beta_W = lambda.
// Throws on a non-symmetric or non-positive-definite A.
PairwiseModel make_gaussian_pairwise(const Eigen::MatrixXd& a, double lambda, double sigma);

// 1-d double well V(x) = x^4/4 - x^2/2 + 1/4 with W(x) = (lambda/2) x^2.
// V is not globally smooth, so beta_V is left undeclared; alpha_V = -1.
PairwiseModel make_double_well_pairwise(double lambda, double sigma);

// Casts a pairwise model as a general one via
//   F0(mu) = int V dmu + (1/2) iint W(x - y) dmu dmu ,
// whose intrinsic gradient is grad V(x) + (1/N) sum_j grad W(x - x^j).
// The pairwise system averages interactions over the N-1 neighbors while the
// empirical measure here includes the particle itself, so drifts agree only
// up to an O(1/N) relative gap; the two conventions are kept verbatim.
GeneralModel pairwise_as_general(const PairwiseModel& model);

// Central-difference gradient with step 1e-5 * (1 + |x|_inf) per coordinate.
Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x);

// Max relative error between declared gradients of V, W and central
// differences at `n_points` seeded Gaussian test points, plus the largest
// evenness defect |W(x) - W(-x)|. Intended as a cheap model-load check.
struct GradientCheck {
    double max_rel_error_v = 0.0;
    double max_rel_error_w = 0.0;
    double max_evenness_defect = 0.0;
};
GradientCheck check_pairwise_gradients(const PairwiseModel& model, int dim, int n_points,
                                       std::uint64_t seed);

}  // namespace meanfield
