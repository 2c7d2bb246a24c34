#include "meanfield/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace meanfield {

namespace {

double required(const std::optional<double>& v, const char* name) {
    if (!v) throw std::invalid_argument(std::string("theory: missing declared constant ") + name);
    return *v;
}

}  // namespace

double alpha_w_minus(const RegularityParams& p) {
    return std::min(required(p.alpha_w, "alpha_W"), 0.0);
}

double lsi_bakry_emery(const RegularityParams& p) {
    double sum = required(p.alpha_v, "alpha_V") + required(p.alpha_w, "alpha_W");
    if (sum <= 0) throw std::domain_error("lsi_bakry_emery: alpha_V + alpha_W must be positive");
    return p.sigma2 / (2.0 * sum);
}

FiniteParticleRegularity finite_particle_regularity(const RegularityParams& p, int n) {
    if (n < 2) throw std::invalid_argument("finite_particle_regularity: N >= 2 required");
    const double ratio = static_cast<double>(n) / (n - 1);
    const double two_over_s2 = 2.0 / p.sigma2;
    FiniteParticleRegularity out;
    out.smoothness = two_over_s2 * (required(p.beta_v, "beta_V") + ratio * required(p.beta_w, "beta_W"));
    out.convexity = two_over_s2 * (required(p.alpha_v, "alpha_V") + ratio * alpha_w_minus(p));
    return out;
}

HolleyStroockResult lsi_holley_stroock(const RegularityParams& p, int n) {
    if (n < 2) throw std::invalid_argument("lsi_holley_stroock: N >= 2 required");
    const double a_v0 = required(p.alpha_v, "alpha_V");
    const double a_w0 = required(p.alpha_w, "alpha_W");
    const double a_w0_minus = std::min(a_w0, 0.0);
    const double ratio = static_cast<double>(n) / (n - 1);
    const double denom = a_v0 + ratio * a_w0_minus;
    if (denom <= 0)
        throw std::domain_error("lsi_holley_stroock: alpha_V0 + N/(N-1) alpha_W0^- must be positive");
    const double osc = p.osc_v1.value_or(0.0) + p.osc_w1.value_or(0.0);
    const double factor = std::exp((2.0 / p.sigma2) * osc);

    HolleyStroockResult out;
    out.clsi_bar = p.sigma2 / denom * factor;
    out.clsi_pi_bound = p.sigma2 / (2.0 * (a_v0 + a_w0)) * factor;
    const double beta_w = required(p.beta_w, "beta_W");
    out.weak_interaction = beta_w > 0 && p.sigma2 / (beta_w * out.clsi_bar) >= std::sqrt(6.0);
    if (beta_w == 0.0) out.weak_interaction = true;  // no interaction at all
    return out;
}

double lsi_lipschitz_perturbation(double alpha, double lipschitz) {
    if (alpha <= 0 || lipschitz < 0)
        throw std::domain_error("lsi_lipschitz_perturbation: alpha > 0 and L >= 0 required");
    return (1.0 / alpha) * std::exp(lipschitz * lipschitz / alpha + 4.0 * lipschitz / std::sqrt(alpha));
}

double lsi_proximal_gibbs(const RegularityParams& p) {
    const double lambda = required(p.lambda, "lambda");
    if (lambda <= 0) throw std::domain_error("lsi_proximal_gibbs: lambda > 0 required");
    const double b = required(p.b_bound, "B");
    const double s2 = p.sigma2;
    return s2 / (2.0 * lambda) *
           std::exp(2.0 * b * b / (lambda * s2) + 8.0 * b / (std::sqrt(2.0 * lambda) * std::sqrt(p.sigma2)));
}

StationaryLsiResult lsi_stationary_uniform(const RegularityParams& p, int d) {
    const double lambda = required(p.lambda, "lambda");
    if (lambda <= 0) throw std::domain_error("lsi_stationary_uniform: lambda > 0 required");
    const double b = required(p.b_bound, "B");
    const double beta = required(p.beta, "beta");
    const double s2 = p.sigma2;
    StationaryLsiResult out;
    out.n_threshold = beta * d / lambda * std::exp(8.0 * b * b / (lambda * s2));
    out.bound = s2 / lambda *
                std::exp(b * b / (lambda * s2) +
                         beta * d / lambda * std::exp(16.0 * b * b / (lambda * s2)));
    return out;
}

WeakInteractionResult weak_interaction_rho(const RegularityParams& p) {
    const double beta_w = required(p.beta_w, "beta_W");
    if (beta_w <= 0) throw std::domain_error("weak_interaction_rho: beta_W > 0 required");
    const double c = required(p.clsi_pi, "C_LSI(pi)");
    const double s2 = p.sigma2;
    WeakInteractionResult out;
    out.rho = s2 * s2 / (8.0 * beta_w * beta_w * c * c);
    out.satisfied = out.rho >= 3.0;
    return out;
}

long poc_sharp_n(int k, int d, double eps, double c_log) {
    if (eps <= 0) throw std::invalid_argument("poc_sharp_n: eps > 0 required");
    double n = c_log * k * std::sqrt(static_cast<double>(d)) / eps;
    return std::max(100L, static_cast<long>(std::ceil(n)));
}

WeakPocBounds poc_weak_bounds(const RegularityParams& p, int n, int k, int d) {
    const double a_v = required(p.alpha_v, "alpha_V");
    const double a_wm = alpha_w_minus(p);
    const double alpha = a_v + a_wm;
    if (alpha <= 0)
        throw std::domain_error("poc_weak_bounds: alpha = alpha_V + alpha_W^- must be positive");
    const double n_min = std::max((a_v - a_wm) / alpha, 2.0);
    if (n < n_min)
        throw std::domain_error("poc_weak_bounds: N below the admissible threshold max((alpha_V - alpha_W^-)/alpha, 2)");
    if (k < 1 || k > n) throw std::invalid_argument("poc_weak_bounds: k in [1, N] required");
    const double beta_w = required(p.beta_w, "beta_W");
    const double beta_v = required(p.beta_v, "beta_V");
    const double s2 = p.sigma2;
    const double kn = static_cast<double>(k) / n;
    WeakPocBounds out;
    out.w2_sq = 4.0 * beta_w * beta_w * s2 * d / (alpha * alpha * alpha) * kn;
    const double bsum = beta_v + beta_w;
    out.kl = 132.0 * beta_w * beta_w * bsum * bsum * d / (alpha * alpha * alpha * alpha) * kn;
    return out;
}

GeneralPocBound poc_general_bound(const RegularityParams& p, int n, int k, int d) {
    const double beta = required(p.beta, "beta");
    const double cbar = required(p.clsi_bar, "Cbar_LSI");
    if (k < 1 || n < 1) throw std::invalid_argument("poc_general_bound: N, k >= 1 required");
    const double s2 = p.sigma2;
    GeneralPocBound out;
    out.kl = 33.0 * beta * cbar * d * k / (s2 * n);
    out.w2_sq = 2.0 * cbar * out.kl;
    out.n_valid = n >= 160.0 * beta * cbar / s2;
    return out;
}

double condition_number(const RegularityParams& p, KappaSetting setting) {
    double alpha = 0.0, beta = 0.0;
    switch (setting) {
        case KappaSetting::strongly_convex:
            beta = required(p.beta_v, "beta_V") + required(p.beta_w, "beta_W");
            alpha = required(p.alpha_v, "alpha_V") + alpha_w_minus(p);
            if (alpha <= 0) throw std::domain_error("condition_number: alpha must be positive");
            break;
        case KappaSetting::lsi_pairwise: {
            beta = required(p.beta_v, "beta_V") + required(p.beta_w, "beta_W");
            double c = std::max(required(p.clsi_mu_n, "C_LSI(mu^N)"), required(p.clsi_pi, "C_LSI(pi)"));
            alpha = p.sigma2 / (2.0 * c);
            break;
        }
        case KappaSetting::lsi_general: {
            beta = required(p.beta, "beta");
            double c = std::max(required(p.clsi_mu_n, "C_LSI(mu^N)"), required(p.clsi_bar, "Cbar_LSI"));
            alpha = p.sigma2 / (2.0 * c);
            break;
        }
    }
    return beta / alpha;
}

namespace {

struct Cell {
    const char* sampler;
    double ka, db, ec;  // M = kappa^ka d^db / eps^ec
    const char* formula;
};

struct Block {
    const char* tag;
    const char* metric;
    KappaSetting setting;
    double n_ka, n_db, n_ec;  // N = kappa^n_ka d^n_db / eps^n_ec (k = 1 form)
    const char* n_formula;
    std::vector<Cell> cells;
};

const std::vector<Block>& table() {
    static const std::vector<Block> t = {
        {"sharp", "w2", KappaSetting::lsi_pairwise, 0, 0.5, 1, "d^{1/2} / eps",
         {{"LMC", 2, 1, 2, "kappa^2 d / eps^2"},
          {"MALA-PS", 1, 0.75, 0.5, "kappa d^{3/4} / eps^{1/2}"},
          {"ULMC-PS", 1.5, 0.5, 1, "kappa^{3/2} d^{1/2} / eps"}}},
        {"sharp-convex", "w2", KappaSetting::strongly_convex, 0, 0.5, 1, "d^{1/2} / eps",
         {{"ULMC+", 1, 1.0 / 3.0, 2.0 / 3.0, "kappa d^{1/3} / eps^{2/3}"}}},
        {"strongly-convex", "sqrt_kl", KappaSetting::strongly_convex, 4, 1, 2, "kappa^4 d / eps^2",
         {{"LMC", 2, 1, 2, "kappa^2 d / eps^2"},
          {"ULMC", 1.5, 0.5, 1, "kappa^{3/2} d^{1/2} / eps"}}},
        {"strongly-convex", "w2", KappaSetting::strongly_convex, 2, 1, 2, "kappa^2 d / eps^2",
         {{"LMC", 1, 1, 2, "kappa d / eps^2"},
          {"ULMC+", 1, 1.0 / 3.0, 2.0 / 3.0, "kappa d^{1/3} / eps^{2/3}"}}},
        {"general", "sqrt_kl", KappaSetting::lsi_general, 1, 1, 2, "kappa d / eps^2",
         {{"LMC", 2, 1, 2, "kappa^2 d / eps^2"},
          {"ULMC-PS", 1.5, 0.5, 1, "kappa^{3/2} d^{1/2} / eps"}}},
    };
    return t;
}

}  // namespace

std::vector<Plan> plan(const std::string& metric, double eps, int d, int k,
                       const std::string& assumptions, const RegularityParams& p) {
    if (eps <= 0) throw std::invalid_argument("plan: eps > 0 required");
    if (d < 1 || k < 1) throw std::invalid_argument("plan: d, k >= 1 required");
    const Block* block = nullptr;
    for (const Block& b : table())
        if (assumptions == b.tag && metric == b.metric) block = &b;
    if (!block) {
        bool known_tag = false;
        for (const Block& b : table())
            if (assumptions == b.tag) known_tag = true;
        if (!known_tag)
            throw std::invalid_argument("plan: unknown assumptions tag '" + assumptions + "'");
        throw std::invalid_argument("plan: no '" + metric + "' rates under assumptions '" +
                                    assumptions + "'");
    }
    const double kappa = condition_number(p, block->setting);
    const bool warn = kappa > std::sqrt(static_cast<double>(d)) / eps;
    auto eval = [&](double ka, double db, double ec) {
        return std::pow(kappa, ka) * std::pow(static_cast<double>(d), db) / std::pow(eps, ec);
    };
    std::vector<Plan> rows;
    for (const Cell& c : block->cells) {
        Plan row;
        row.sampler = c.sampler;
        row.metric = metric;
        row.assumptions = assumptions;
        row.m_formula = c.formula;
        row.n_formula = block->n_formula;
        row.m_value = std::max(1.0, std::ceil(eval(c.ka, c.db, c.ec)));
        row.n_value = std::max(1.0, std::ceil(k * eval(block->n_ka, block->n_db, block->n_ec)));
        row.kappa_warning = warn;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace meanfield
