#pragma once

#include <optional>
#include <string>
#include <vector>

namespace meanfield {

// Declared regularity constants. In the bounded-perturbation calculators the
// alpha fields play the role of the convex parts (V0, W0) and the osc fields
// bound the perturbations (V1, W1).
struct RegularityParams {
    std::optional<double> alpha_v, beta_v, alpha_w, beta_w;
    double sigma2 = 2.0;  // diffusion scale squared; formulas use sigma^2
    std::optional<double> osc_v1, osc_w1;
    std::optional<double> beta;     // intrinsic smoothness of F0
    std::optional<double> b_bound;  // uniform intrinsic-gradient bound
    std::optional<double> lambda;
    std::optional<double> clsi_pi, clsi_mu_n, clsi_bar;
};

// min(alpha_W, 0): only the negative part of the interaction convexity
// contributes to the strong log-concavity of the particle system.
double alpha_w_minus(const RegularityParams& p);

// C_LSI(pi) <= sigma^2 / (2 (alpha_V + alpha_W)); requires the sum positive.
double lsi_bakry_emery(const RegularityParams& p);

// Convexity and smoothness of log(1/mu^{1:N}):
//   smoothness = (2/sigma^2) (beta_V + N/(N-1) beta_W)
//   convexity  = (2/sigma^2) (alpha_V + N/(N-1) min(alpha_W, 0))
struct FiniteParticleRegularity {
    double convexity;
    double smoothness;
};
FiniteParticleRegularity finite_particle_regularity(const RegularityParams& p, int n);

// Bounded-perturbation LSI constants:
//   Cbar       = sigma^2/(alpha_V0 + N/(N-1) alpha_W0^-) * exp((2/sigma^2)(osc V1 + osc W1))
//   C_LSI(pi) <= sigma^2/(2 (alpha_V0 + alpha_W0)) * exp(same factor) <= Cbar/2
// plus the weak-interaction test sigma^2 / (beta_W Cbar) >= sqrt(6).
struct HolleyStroockResult {
    double clsi_pi_bound;
    double clsi_bar;
    bool weak_interaction;
};
HolleyStroockResult lsi_holley_stroock(const RegularityParams& p, int n);

// (1/alpha) exp(L^2/alpha + 4 L / sqrt(alpha)) for an L-Lipschitz perturbation
// of an alpha-strongly-convex potential.
double lsi_lipschitz_perturbation(double alpha, double lipschitz);

// Cbar <= (sigma^2/(2 lambda)) exp(2B^2/(lambda sigma^2) + 8B/(sqrt(2 lambda) sigma)).
double lsi_proximal_gibbs(const RegularityParams& p);

// Order-of-magnitude uniform LSI for the stationary measure, all hidden
// universal constants set to 1:
//   value       = (sigma^2/lambda) exp(B^2/(lambda sigma^2) + (beta d/lambda) exp(16 B^2/(lambda sigma^2)))
//   n_threshold = (beta d/lambda) exp(8 B^2/(lambda sigma^2))
// Below the threshold the guarantee is silent.
struct StationaryLsiResult {
    double bound;
    double n_threshold;
    bool order_of_magnitude = true;
};
StationaryLsiResult lsi_stationary_uniform(const RegularityParams& p, int d);

// rho = sigma^4 / (8 beta_W^2 C_LSI(pi)^2), and whether rho >= 3.
struct WeakInteractionResult {
    double rho;
    bool satisfied;
};
WeakInteractionResult weak_interaction_rho(const RegularityParams& p);

// Particle count for the sharp rate: max(100, ceil(c_log * k sqrt(d) / eps)).
// c_log stands in for the hidden polylog factor.
long poc_sharp_n(int k, int d, double eps, double c_log = 1.0);

// Weak propagation of chaos (strong displacement convexity). With
// alpha = alpha_V + alpha_W^- > 0 and N >= max((alpha_V - alpha_W^-)/alpha, 2):
//   W2^2 <= 4 beta_W^2 sigma^2 d/alpha^3 * k/N
//   KL   <= 132 beta_W^2 (beta_V + beta_W)^2 d/alpha^4 * k/N
struct WeakPocBounds {
    double w2_sq;
    double kl;
};
WeakPocBounds poc_weak_bounds(const RegularityParams& p, int n, int k, int d);

// General-functional propagation of chaos:
//   KL <= 33 beta Cbar d k / (sigma^2 N), valid for N >= 160 beta Cbar/sigma^2,
// with the transport companion W2^2 <= 2 Cbar KL.
struct GeneralPocBound {
    double kl;
    double w2_sq;
    bool n_valid;
};
GeneralPocBound poc_general_bound(const RegularityParams& p, int n, int k, int d);

// kappa = beta / alpha with the three resolutions of alpha:
//   strongly_convex : alpha = alpha_V + alpha_W^-,            beta = beta_V + beta_W
//   lsi_pairwise    : alpha = sigma^2/(2 max(C(mu^N), C(pi))), beta = beta_V + beta_W
//   lsi_general     : alpha = sigma^2/(2 max(C(mu^N), Cbar)),  beta = declared beta
enum class KappaSetting { strongly_convex, lsi_pairwise, lsi_general };
double condition_number(const RegularityParams& p, KappaSetting setting);

// One oracle-complexity row: sampler name, metric, symbolic (M, N) formulas
// exactly as tabulated (k = 1 form), and numeric instantiations with all
// polylog factors set to 1. Numeric N is scaled by k since every bias bound
// behind the table carries k/N or (k/N)^2.
struct Plan {
    std::string sampler;
    std::string metric;       // "w2" (scaled sqrt(alpha)/sigma W2) or "sqrt_kl"
    std::string assumptions;  // block tag
    std::string m_formula;
    std::string n_formula;
    double m_value;
    double n_value;
    bool up_to_constants = true;  // polylog/universal constants set to 1
    bool kappa_warning = false;   // kappa > sqrt(d)/eps; tabulated rates assume otherwise
};

// Blocks: "sharp" (LSI + weak interaction; w2),
//         "sharp-convex" (weak interaction + strong convexity; w2),
//         "strongly-convex" (w2 or sqrt_kl),
//         "general" (sqrt_kl).
std::vector<Plan> plan(const std::string& metric, double eps, int d, int k,
                       const std::string& assumptions, const RegularityParams& p);

}  // namespace meanfield
