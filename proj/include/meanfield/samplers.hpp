#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meanfield/model.hpp"
#include "meanfield/nn.hpp"

namespace meanfield {

class DivergedChain : public std::runtime_error {
public:
    DivergedChain(long iteration, const std::string& what)
        : std::runtime_error(what), iteration(iteration) {}
    long iteration;
};

// First-order oracle view of a model: unnormalized log density and the
// Langevin drift (sigma^2/2 times the score). Every call through the counted
// accessors increments oracle_calls, which is what ChainOutput reports.
struct Target {
    int n_particles = 0;
    int dim = 0;
    double sigma = 1.0;
    // Declared curvature bound on the potential (beta_V + 2 beta_W scale);
    // used for step-size warnings and the derived defaults below.
    std::optional<double> smooth_bound;
    std::function<double(const Eigen::MatrixXd&)> log_density_fn;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> drift_fn;
    mutable long long oracle_calls = 0;

    double log_density(const Eigen::MatrixXd& x) const {
        ++oracle_calls;
        return log_density_fn(x);
    }
    Eigen::MatrixXd drift(const Eigen::MatrixXd& x) const {
        ++oracle_calls;
        return drift_fn(x);
    }
};

Target make_target(const PairwiseModel& model, int n_particles, int dim);
Target make_target(const GeneralModel& model, int n_particles, int dim);

struct SamplerConfig {
    double step_size = 0.1;
    long n_iters = 1000;
    long burn_in = 0;
    long thinning = 1;
    // Underdamped friction; 0 selects the critical-damping heuristic
    // sqrt(2 * smooth_bound * 2/sigma^2) when constants are declared, else 1.
    double friction = 0.0;
    // Proximal forward variance; 0 selects sigma^2/(4 * smooth_bound).
    double prox_step = 0.0;
    // Inner-sampler step; 0 derives a stable default from smooth_bound.
    double inner_step = 0.0;
    long inner_iters = 0;
    std::uint64_t seed = 0;
    int k_out = 1;

    void validate() const;
};

struct ChainOutput {
    std::vector<Eigen::MatrixXd> samples;  // post burn-in, thinned
    // Velocity samples, retained alongside positions by the underdamped
    // schemes; empty for the others.
    std::vector<Eigen::MatrixXd> velocity_samples;
    std::optional<double> acceptance_rate;  // MH-corrected schemes only
    double wall_time = 0.0;
    long long oracle_calls = 0;
    Eigen::MatrixXd final_state;
};

// Oracle-call accounting per retained scheme (n = n_iters, m = inner_iters):
//   lmc            n              (one drift per step)
//   mala           1 + 3n         (initial drift; per step one drift and two
//                                  log densities, current and proposal)
//   ulmc           n              (one drift per step)
//   ulmc_rm        2n             (drift at the step start and the midpoint)
//   proximal(mala) n (1 + 3m)
//   proximal(ulmc) n m

// Euler-Maruyama on the rescaled diffusion:
// X+ = X + h drift(X) + sigma sqrt(h) xi.
ChainOutput run_lmc(const Target& target, const SamplerConfig& config,
                    std::optional<Eigen::MatrixXd> init = std::nullopt);

// LMC proposal with Metropolis-Hastings correction; reversible for mu^{1:N}.
ChainOutput run_mala(const Target& target, const SamplerConfig& config,
                     std::optional<Eigen::MatrixXd> init = std::nullopt);

// Log MH ratio log[mu(y) q(y -> x)] - log[mu(x) q(x -> y)] for the LMC
// proposal at step size h. Antisymmetric under swapping x and y.
double mala_log_acceptance_ratio(const Target& target, const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y, double h);

// Underdamped dynamics  dx = v dt, dv = (-gamma v + drift(x)) dt
//                       + sigma sqrt(gamma) dB,
// integrated with the gradient frozen per step and the Ornstein-Uhlenbeck
// velocity block solved exactly (exponential integrator). The invariant law
// is mu^{1:N}(x) * N(0, (sigma^2/2) I)(v); the x marginal carries O(h) bias.
// Velocities start in their stationary law unless init_velocity is given.
ChainOutput run_ulmc(const Target& target, const SamplerConfig& config,
                     std::optional<Eigen::MatrixXd> init = std::nullopt,
                     std::optional<Eigen::MatrixXd> init_velocity = std::nullopt);

// Randomized-midpoint discretization of the same dynamics: per step draw
// u ~ U(0,1], evaluate the drift at the exactly-integrated intermediate point
// t + u h, and finish the step with the exact joint Gaussian increment triple
// (midpoint, position, velocity). Update equations: docs/ulmc_rm.md.
ChainOutput run_ulmc_rm(const Target& target, const SamplerConfig& config,
                        std::optional<Eigen::MatrixXd> init = std::nullopt,
                        std::optional<Eigen::MatrixXd> init_velocity = std::nullopt);

enum class InnerSampler { mala, ulmc };

// Proximal sampler: alternates y ~ N(x, h_prox I) with the restricted
// Gaussian oracle x ~ mu(.) exp(-|. - y|^2 / (2 h_prox)), the latter
// approximated by inner_iters steps of the chosen inner sampler warm-started
// at y. Requires h_prox <= sigma^2 / (4 smooth_bound) when the bound is
// declared, so the RGO is strongly log-concave.
ChainOutput run_proximal(const Target& target, const SamplerConfig& config, InnerSampler inner,
                         std::optional<Eigen::MatrixXd> init = std::nullopt);

enum class SamplerKind { lmc, mala, ulmc, ulmc_rm, proximal_mala, proximal_ulmc };

SamplerKind sampler_kind_from_string(const std::string& name);
std::string to_string(SamplerKind kind);

ChainOutput run_sampler(const Target& target, SamplerKind kind, const SamplerConfig& config,
                        std::optional<Eigen::MatrixXd> init = std::nullopt);

// Algorithm: run the chosen log-concave sampler on mu^{1:N} and keep the
// first k_out particles of every retained state; by exchangeability these
// approximate the k-particle marginal.
struct MeanFieldSamples {
    std::vector<Eigen::MatrixXd> particles;  // each k_out x d
    ChainOutput stats;                       // samples cleared, counters kept
};
MeanFieldSamples sample_mean_field(const Target& target, SamplerKind kind,
                                   const SamplerConfig& config,
                                   std::optional<Eigen::MatrixXd> init = std::nullopt);

}  // namespace meanfield
