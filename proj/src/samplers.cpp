#include "meanfield/samplers.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "meanfield/rng.hpp"

namespace meanfield {

namespace {

constexpr double kDivergenceThreshold = 1e12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_state(const Eigen::MatrixXd& x, long iteration) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceThreshold)
        throw DivergedChain(iteration,
                            "chain diverged at iteration " + std::to_string(iteration));
}

Eigen::MatrixXd gaussian_matrix(Rng& rng, int n, int d) {
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    return m;
}

Eigen::MatrixXd initial_state(const Target& t, const SamplerConfig&,
                              const std::optional<Eigen::MatrixXd>& init, Rng& rng) {
    if (init) {
        if (init->rows() != t.n_particles || init->cols() != t.dim)
            throw std::invalid_argument("sampler: initial state has the wrong shape");
        return *init;
    }
    return gaussian_matrix(rng, t.n_particles, t.dim);
}

bool retained(long iteration, const SamplerConfig& cfg) {
    return iteration > cfg.burn_in && (iteration - cfg.burn_in - 1) % cfg.thinning == 0;
}

double friction_or_default(const Target& t, const SamplerConfig& cfg) {
    if (cfg.friction > 0) return cfg.friction;
    if (t.smooth_bound)
        return std::sqrt(2.0 * *t.smooth_bound * 2.0 / (t.sigma * t.sigma));
    return 1.0;
}

// Raw Brownian-integral covariances of the underdamped block over [0, t]
// (unit noise amplitude; multiply by sigma^2 gamma):
//   Wv = int e^{-g(t-s)} dB,  Wx = int (1 - e^{-g(t-s)})/g dB.
double cov_vv(double g, double t) { return -std::expm1(-2.0 * g * t) / (2.0 * g); }
double cov_xx(double g, double t) {
    double e1 = -std::expm1(-g * t), e2 = -std::expm1(-2.0 * g * t);
    return (t - 2.0 * e1 / g + e2 / (2.0 * g)) / (g * g);
}
double cov_xv(double g, double t) {
    double e1 = -std::expm1(-g * t), e2 = -std::expm1(-2.0 * g * t);
    return (2.0 * e1 - e2) / (2.0 * g * g);
}

struct UlmcCoefficients {
    double a, b, c;        // x+ = x + a v + b g,  v+ = c v + a g
    double lxx, lvx, lvv;  // Cholesky of the (x, v) noise covariance
};

UlmcCoefficients ulmc_coefficients(double gamma, double h, double sigma) {
    UlmcCoefficients k;
    double e1 = -std::expm1(-gamma * h);
    k.a = e1 / gamma;
    k.b = (h - k.a) / gamma;
    k.c = 1.0 - e1;
    double s2g = sigma * sigma * gamma;
    double qxx = s2g * cov_xx(gamma, h);
    double qxv = s2g * cov_xv(gamma, h);
    double qvv = s2g * cov_vv(gamma, h);
    k.lxx = std::sqrt(std::max(0.0, qxx));
    k.lvx = (k.lxx > 0) ? qxv / k.lxx : 0.0;
    k.lvv = std::sqrt(std::max(0.0, qvv - k.lvx * k.lvx));
    return k;
}

}  // namespace

void SamplerConfig::validate() const {
    if (step_size <= 0) throw std::invalid_argument("SamplerConfig: step_size > 0 required");
    if (n_iters < 1) throw std::invalid_argument("SamplerConfig: n_iters >= 1 required");
    if (burn_in < 0 || burn_in >= n_iters)
        throw std::invalid_argument("SamplerConfig: 0 <= burn_in < n_iters required");
    if (thinning < 1) throw std::invalid_argument("SamplerConfig: thinning >= 1 required");
    if (k_out < 1) throw std::invalid_argument("SamplerConfig: k_out >= 1 required");
    if (friction < 0) throw std::invalid_argument("SamplerConfig: friction >= 0 required");
}

Target make_target(const PairwiseModel& model, int n_particles, int dim) {
    if (n_particles < 2)
        throw std::invalid_argument("make_target: pairwise models need N >= 2");
    Target t;
    t.n_particles = n_particles;
    t.dim = dim;
    t.sigma = model.sigma;
    if (model.constants.beta_v && model.constants.beta_w)
        t.smooth_bound = *model.constants.beta_v + 2.0 * *model.constants.beta_w;
    t.log_density_fn = [model](const Eigen::MatrixXd& x) {
        return pairwise_log_density(model, ParticleState(x));
    };
    t.drift_fn = [model](const Eigen::MatrixXd& x) {
        return pairwise_drift(model, ParticleState(x));
    };
    return t;
}

Target make_target(const GeneralModel& model, int n_particles, int dim) {
    Target t;
    t.n_particles = n_particles;
    t.dim = dim;
    t.sigma = model.sigma;
    if (model.beta) t.smooth_bound = 2.0 * *model.beta;
    t.log_density_fn = [model](const Eigen::MatrixXd& x) {
        return general_log_density(model, ParticleState(x));
    };
    t.drift_fn = [model](const Eigen::MatrixXd& x) {
        return general_drift(model, ParticleState(x));
    };
    return t;
}

ChainOutput run_lmc(const Target& target, const SamplerConfig& cfg,
                    std::optional<Eigen::MatrixXd> init) {
    cfg.validate();
    const auto t0 = Clock::now();
    const double h = cfg.step_size;
    if (target.smooth_bound) {
        double stable = target.sigma * target.sigma / (2.0 * *target.smooth_bound);
        if (h > stable)
            std::cerr << "[meanfield] warning: lmc step size " << h
                      << " above the stability heuristic " << stable << "\n";
    }
    Rng rng(cfg.seed);
    Eigen::MatrixXd x = initial_state(target, cfg, init, rng);
    const double noise_scale = target.sigma * std::sqrt(h);

    ChainOutput out;
    target.oracle_calls = 0;
    for (long iter = 1; iter <= cfg.n_iters; ++iter) {
        Eigen::MatrixXd g = target.drift(x);
        x += h * g + noise_scale * gaussian_matrix(rng, target.n_particles, target.dim);
        check_state(x, iter);
        if (retained(iter, cfg)) out.samples.push_back(x);
    }
    out.final_state = x;
    out.oracle_calls = target.oracle_calls;
    out.wall_time = seconds_since(t0);
    return out;
}

double mala_log_acceptance_ratio(const Target& target, const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y, double h) {
    const double s2h = target.sigma * target.sigma * h;
    Eigen::MatrixXd gx = target.drift(x);
    Eigen::MatrixXd gy = target.drift(y);
    double lpx = target.log_density(x);
    double lpy = target.log_density(y);
    double fwd = -(y - x - h * gx).squaredNorm() / (2.0 * s2h);
    double rev = -(x - y - h * gy).squaredNorm() / (2.0 * s2h);
    return (lpy - lpx) + (rev - fwd);
}

ChainOutput run_mala(const Target& target, const SamplerConfig& cfg,
                     std::optional<Eigen::MatrixXd> init) {
    cfg.validate();
    const auto t0 = Clock::now();
    const double h = cfg.step_size;
    const double s2h = target.sigma * target.sigma * h;
    Rng rng(cfg.seed);
    Eigen::MatrixXd x = initial_state(target, cfg, init, rng);
    const double noise_scale = target.sigma * std::sqrt(h);

    ChainOutput out;
    target.oracle_calls = 0;
    Eigen::MatrixXd gx = target.drift(x);
    long accepted = 0;
    for (long iter = 1; iter <= cfg.n_iters; ++iter) {
        Eigen::MatrixXd y =
            x + h * gx + noise_scale * gaussian_matrix(rng, target.n_particles, target.dim);
        bool accept = false;
        if (y.allFinite() && y.cwiseAbs().maxCoeff() <= kDivergenceThreshold) {
            Eigen::MatrixXd gy = target.drift(y);
            double lpx = target.log_density(x);
            double lpy = target.log_density(y);
            double fwd = -(y - x - h * gx).squaredNorm() / (2.0 * s2h);
            double rev = -(x - y - h * gy).squaredNorm() / (2.0 * s2h);
            double log_ratio = (lpy - lpx) + (rev - fwd);
            if (std::log(rng.uniform()) < log_ratio) {
                accept = true;
                x = y;
                gx = gy;
            }
        } else {
            rng.uniform();  // keep the draw sequence aligned on rejected overflows
        }
        if (accept) ++accepted;
        check_state(x, iter);
        if (retained(iter, cfg)) out.samples.push_back(x);
    }
    if (cfg.n_iters >= 10000 && accepted == 0)
        std::cerr << "[meanfield] warning: mala accepted nothing over " << cfg.n_iters
                  << " steps; check the step size\n";
    out.final_state = x;
    out.acceptance_rate = static_cast<double>(accepted) / cfg.n_iters;
    out.oracle_calls = target.oracle_calls;
    out.wall_time = seconds_since(t0);
    return out;
}

ChainOutput run_ulmc(const Target& target, const SamplerConfig& cfg,
                     std::optional<Eigen::MatrixXd> init,
                     std::optional<Eigen::MatrixXd> init_velocity) {
    cfg.validate();
    const auto t0 = Clock::now();
    const double gamma = friction_or_default(target, cfg);
    const auto k = ulmc_coefficients(gamma, cfg.step_size, target.sigma);
    Rng rng(cfg.seed);
    Eigen::MatrixXd x = initial_state(target, cfg, init, rng);
    // Velocity starts in its stationary law N(0, (sigma^2/2) I).
    Eigen::MatrixXd v =
        init_velocity ? *init_velocity
                      : Eigen::MatrixXd((target.sigma / std::sqrt(2.0)) *
                                        gaussian_matrix(rng, target.n_particles, target.dim));

    ChainOutput out;
    target.oracle_calls = 0;
    for (long iter = 1; iter <= cfg.n_iters; ++iter) {
        Eigen::MatrixXd g = target.drift(x);
        Eigen::MatrixXd ex(target.n_particles, target.dim), ev(target.n_particles, target.dim);
        for (int i = 0; i < target.n_particles; ++i) {
            for (int j = 0; j < target.dim; ++j) {
                double z1 = rng.normal(), z2 = rng.normal();
                ex(i, j) = k.lxx * z1;
                ev(i, j) = k.lvx * z1 + k.lvv * z2;
            }
        }
        x += k.a * v + k.b * g + ex;
        v = k.c * v + k.a * g + ev;
        check_state(x, iter);
        if (retained(iter, cfg)) {
            out.samples.push_back(x);
            out.velocity_samples.push_back(v);
        }
    }
    out.final_state = x;
    out.oracle_calls = target.oracle_calls;
    out.wall_time = seconds_since(t0);
    return out;
}

ChainOutput run_ulmc_rm(const Target& target, const SamplerConfig& cfg,
                        std::optional<Eigen::MatrixXd> init,
                        std::optional<Eigen::MatrixXd> init_velocity) {
    cfg.validate();
    const auto t0 = Clock::now();
    const double gamma = friction_or_default(target, cfg);
    const double h = cfg.step_size;
    const double s2g = target.sigma * target.sigma * gamma;
    Rng rng(cfg.seed);
    Eigen::MatrixXd x = initial_state(target, cfg, init, rng);
    Eigen::MatrixXd v =
        init_velocity ? *init_velocity
                      : Eigen::MatrixXd((target.sigma / std::sqrt(2.0)) *
                                        gaussian_matrix(rng, target.n_particles, target.dim));

    const int n = target.n_particles, d = target.dim;
    ChainOutput out;
    target.oracle_calls = 0;
    for (long iter = 1; iter <= cfg.n_iters; ++iter) {
        const double u = rng.uniform();  // (0, 1]
        const double s = u * h;
        const double r = h - s;
        const double e1s = -std::expm1(-gamma * s);
        const double e2s = -std::expm1(-2.0 * gamma * s);
        const double er = std::exp(-gamma * r);
        const double a_s = e1s / gamma;
        const double b_s = (s - a_s) / gamma;
        const double a_h = -std::expm1(-gamma * h) / gamma;
        const double c_h = std::exp(-gamma * h);

        // Joint covariance of (W_mid, W_x, W_v), unit amplitude.
        double c_mm = cov_xx(gamma, s);
        double c_xx = cov_xx(gamma, h);
        double c_vv = cov_vv(gamma, h);
        double c_xv = cov_xv(gamma, h);
        double c_mx = (s - e1s / gamma - er * e1s / gamma + er * e2s / (2.0 * gamma)) /
                      (gamma * gamma);
        double c_mv = er * (2.0 * e1s - e2s) / (2.0 * gamma * gamma);

        // Cholesky of the scaled 3x3, with zero-pivot guards for sigma = 0.
        double q11 = s2g * c_mm, q21 = s2g * c_mx, q22 = s2g * c_xx;
        double q31 = s2g * c_mv, q32 = s2g * c_xv, q33 = s2g * c_vv;
        double l11 = std::sqrt(std::max(0.0, q11));
        double l21 = (l11 > 0) ? q21 / l11 : 0.0;
        double l31 = (l11 > 0) ? q31 / l11 : 0.0;
        double l22 = std::sqrt(std::max(0.0, q22 - l21 * l21));
        double l32 = (l22 > 0) ? (q32 - l31 * l21) / l22 : 0.0;
        double l33 = std::sqrt(std::max(0.0, q33 - l31 * l31 - l32 * l32));

        Eigen::MatrixXd wm(n, d), wx(n, d), wv(n, d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
                wm(i, j) = l11 * z1;
                wx(i, j) = l21 * z1 + l22 * z2;
                wv(i, j) = l31 * z1 + l32 * z2 + l33 * z3;
            }
        }

        Eigen::MatrixXd g0 = target.drift(x);
        Eigen::MatrixXd x_mid = x + a_s * v + b_s * g0 + wm;
        check_state(x_mid, iter);
        Eigen::MatrixXd gm = target.drift(x_mid);

        const double kx = h * (-std::expm1(-gamma * r)) / gamma;
        const double kv = h * er;
        x += a_h * v + kx * gm + wx;
        v = c_h * v + kv * gm + wv;
        check_state(x, iter);
        if (retained(iter, cfg)) {
            out.samples.push_back(x);
            out.velocity_samples.push_back(v);
        }
    }
    out.final_state = x;
    out.oracle_calls = target.oracle_calls;
    out.wall_time = seconds_since(t0);
    return out;
}

ChainOutput run_proximal(const Target& target, const SamplerConfig& cfg, InnerSampler inner,
                         std::optional<Eigen::MatrixXd> init) {
    cfg.validate();
    if (cfg.inner_iters < 1)
        throw std::invalid_argument("run_proximal: inner_iters >= 1 required");
    const auto t0 = Clock::now();
    const double s2 = target.sigma * target.sigma;

    double h_prox = cfg.prox_step;
    if (h_prox <= 0) {
        if (!target.smooth_bound)
            throw std::invalid_argument(
                "run_proximal: prox_step must be given when no smoothness constant is declared");
        h_prox = s2 / (4.0 * *target.smooth_bound);
    }
    if (target.smooth_bound && h_prox > s2 / (4.0 * *target.smooth_bound) * (1.0 + 1e-12))
        throw std::invalid_argument(
            "run_proximal: prox_step exceeds sigma^2/(4 * smoothness); the restricted-Gaussian "
            "target would not be strongly log-concave");

    double h_inner = cfg.inner_step;
    if (h_inner <= 0) {
        if (!target.smooth_bound)
            throw std::invalid_argument(
                "run_proximal: inner_step must be given when no smoothness constant is declared");
        // Curvature of the RGO potential is at most smooth_bound + sigma^2/(2 h_prox).
        h_inner = 1.0 / (2.0 * (*target.smooth_bound + s2 / (2.0 * h_prox)));
    }

    Rng rng(cfg.seed);
    Eigen::MatrixXd x = initial_state(target, cfg, init, rng);

    // RGO target for the current anchor y; shares the base oracle counter.
    Eigen::MatrixXd y = x;
    Target rgo;
    rgo.n_particles = target.n_particles;
    rgo.dim = target.dim;
    rgo.sigma = target.sigma;
    rgo.log_density_fn = [&target, &y, h_prox](const Eigen::MatrixXd& z) {
        return target.log_density(z) - (z - y).squaredNorm() / (2.0 * h_prox);
    };
    rgo.drift_fn = [&target, &y, h_prox, s2](const Eigen::MatrixXd& z) {
        return Eigen::MatrixXd(target.drift(z) - (s2 / (2.0 * h_prox)) * (z - y));
    };

    const int n = target.n_particles, d = target.dim;
    const double gamma_inner =
        target.smooth_bound
            ? std::sqrt(2.0 * (*target.smooth_bound + s2 / (2.0 * h_prox)) * 2.0 / s2)
            : 1.0;
    const double inner_noise = target.sigma * std::sqrt(h_inner);
    const auto ki = ulmc_coefficients(gamma_inner, h_inner, target.sigma);

    ChainOutput out;
    target.oracle_calls = 0;
    long long accepted = 0, proposals = 0;
    for (long iter = 1; iter <= cfg.n_iters; ++iter) {
        y = x + std::sqrt(h_prox) * gaussian_matrix(rng, n, d);
        check_state(y, iter);
        Eigen::MatrixXd z = y;  // warm start at the anchor
        if (inner == InnerSampler::mala) {
            Eigen::MatrixXd gz = rgo.drift(z);
            double lpz = 0.0;
            for (long step = 0; step < cfg.inner_iters; ++step) {
                Eigen::MatrixXd w = z + h_inner * gz + inner_noise * gaussian_matrix(rng, n, d);
                ++proposals;
                if (w.allFinite() && w.cwiseAbs().maxCoeff() <= kDivergenceThreshold) {
                    Eigen::MatrixXd gw = rgo.drift(w);
                    lpz = rgo.log_density(z);
                    double lpw = rgo.log_density(w);
                    double fwd = -(w - z - h_inner * gz).squaredNorm() / (2.0 * s2 * h_inner);
                    double rev = -(z - w - h_inner * gw).squaredNorm() / (2.0 * s2 * h_inner);
                    if (std::log(rng.uniform()) < (lpw - lpz) + (rev - fwd)) {
                        ++accepted;
                        z = w;
                        gz = gw;
                    }
                } else {
                    rng.uniform();
                }
            }
        } else {
            Eigen::MatrixXd v =
                (target.sigma / std::sqrt(2.0)) * gaussian_matrix(rng, n, d);
            for (long step = 0; step < cfg.inner_iters; ++step) {
                Eigen::MatrixXd g = rgo.drift(z);
                Eigen::MatrixXd ex(n, d), ev(n, d);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < d; ++j) {
                        double z1 = rng.normal(), z2 = rng.normal();
                        ex(i, j) = ki.lxx * z1;
                        ev(i, j) = ki.lvx * z1 + ki.lvv * z2;
                    }
                }
                z += ki.a * v + ki.b * g + ex;
                v = ki.c * v + ki.a * g + ev;
                check_state(z, iter);
            }
        }
        x = z;
        check_state(x, iter);
        if (retained(iter, cfg)) out.samples.push_back(x);
    }
    out.final_state = x;
    if (inner == InnerSampler::mala && proposals > 0)
        out.acceptance_rate = static_cast<double>(accepted) / proposals;
    out.oracle_calls = target.oracle_calls;
    out.wall_time = seconds_since(t0);
    return out;
}

SamplerKind sampler_kind_from_string(const std::string& name) {
    if (name == "lmc") return SamplerKind::lmc;
    if (name == "mala") return SamplerKind::mala;
    if (name == "ulmc") return SamplerKind::ulmc;
    if (name == "ulmc-rm") return SamplerKind::ulmc_rm;
    if (name == "proximal-mala") return SamplerKind::proximal_mala;
    if (name == "proximal-ulmc") return SamplerKind::proximal_ulmc;
    throw std::invalid_argument("unknown sampler '" + name + "'");
}

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::lmc: return "lmc";
        case SamplerKind::mala: return "mala";
        case SamplerKind::ulmc: return "ulmc";
        case SamplerKind::ulmc_rm: return "ulmc-rm";
        case SamplerKind::proximal_mala: return "proximal-mala";
        case SamplerKind::proximal_ulmc: return "proximal-ulmc";
    }
    return "unknown";
}

ChainOutput run_sampler(const Target& target, SamplerKind kind, const SamplerConfig& cfg,
                        std::optional<Eigen::MatrixXd> init) {
    switch (kind) {
        case SamplerKind::lmc: return run_lmc(target, cfg, std::move(init));
        case SamplerKind::mala: return run_mala(target, cfg, std::move(init));
        case SamplerKind::ulmc: return run_ulmc(target, cfg, std::move(init));
        case SamplerKind::ulmc_rm: return run_ulmc_rm(target, cfg, std::move(init));
        case SamplerKind::proximal_mala:
            return run_proximal(target, cfg, InnerSampler::mala, std::move(init));
        case SamplerKind::proximal_ulmc:
            return run_proximal(target, cfg, InnerSampler::ulmc, std::move(init));
    }
    throw std::logic_error("run_sampler: unreachable");
}

MeanFieldSamples sample_mean_field(const Target& target, SamplerKind kind,
                                   const SamplerConfig& cfg,
                                   std::optional<Eigen::MatrixXd> init) {
    if (cfg.k_out > target.n_particles)
        throw std::invalid_argument("sample_mean_field: k_out must not exceed N");
    ChainOutput chain = run_sampler(target, kind, cfg, std::move(init));
    MeanFieldSamples out;
    out.particles.reserve(chain.samples.size());
    for (const auto& s : chain.samples) out.particles.push_back(s.topRows(cfg.k_out));
    chain.samples.clear();
    out.stats = std::move(chain);
    return out;
}

}  // namespace meanfield
