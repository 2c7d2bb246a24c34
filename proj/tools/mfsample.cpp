// mfsample: config-driven experiment runner for mean-field stationary
// sampling. Subcommands: plan | bounds | gaussian-validate | sample |
// poc-scan | nn-train. Exit codes: 0 success, 1 usage/config error,
// 2 numerical failure, 3 invariant violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <vector>

#include "meanfield/config.hpp"
#include "meanfield/csv.hpp"
#include "meanfield/diagnostics.hpp"
#include "meanfield/gaussian_oracle.hpp"
#include "meanfield/model.hpp"
#include "meanfield/nn.hpp"
#include "meanfield/parallel.hpp"
#include "meanfield/rng.hpp"
#include "meanfield/samplers.hpp"
#include "meanfield/theory.hpp"

namespace mf = meanfield;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "mfsample 0.1.0";

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInvariant = 3;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class InvariantViolation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad config files and unreadable inputs are usage problems, not numerics.
mf::KeyValueConfig load_config(const std::string& path) {
    try {
        return mf::KeyValueConfig::parse_file(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

Eigen::MatrixXd parse_matrix(const std::string& text, int dim, const std::string& what) {
    std::vector<std::vector<double>> rows;
    std::string row_text;
    std::istringstream rows_in(text);
    while (std::getline(rows_in, row_text, ';')) {
        std::istringstream ss(row_text);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(row);
    }
    if (static_cast<int>(rows.size()) != dim)
        throw UsageError(what + ": expected " + std::to_string(dim) + " rows");
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (static_cast<int>(rows[i].size()) != dim)
            throw UsageError(what + ": row " + std::to_string(i + 1) + " has wrong width");
        for (int j = 0; j < dim; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

struct LoadedModel {
    mf::Target target;
    std::string family;
    json params;
    std::optional<mf::GaussianSpec> gaussian;  // set for the gaussian family
};

LoadedModel load_model(const mf::KeyValueConfig& cfg) {
    LoadedModel out;
    out.family = cfg.get_string("model", "family");
    const int n = static_cast<int>(cfg.get_long("model", "n_particles"));
    const double sigma2 = cfg.get_double("model", "sigma2", 2.0);
    const double sigma = std::sqrt(sigma2);
    const double lambda = cfg.get_double("model", "lambda", 0.0);
    out.params["family"] = out.family;
    out.params["n_particles"] = n;
    out.params["sigma2"] = sigma2;
    out.params["lambda"] = lambda;

    if (out.family == "gaussian") {
        const int d = static_cast<int>(cfg.get_long("model", "dim"));
        Eigen::MatrixXd a;
        if (cfg.has("model", "a")) {
            a = parse_matrix(cfg.get_string("model", "a"), d, "model.a");
        } else {
            a = cfg.get_double("model", "a_scale", 1.0) * Eigen::MatrixXd::Identity(d, d);
        }
        mf::PairwiseModel model = mf::make_gaussian_pairwise(a, lambda, sigma);
        out.target = mf::make_target(model, n, d);
        out.params["dim"] = d;
        mf::GaussianSpec spec;
        spec.a = a;
        spec.lambda = lambda;
        spec.sigma = sigma;
        spec.n_particles = n;
        spec.k = 1;
        out.gaussian = spec;
    } else if (out.family == "double-well") {
        mf::PairwiseModel model = mf::make_double_well_pairwise(lambda, sigma);
        out.target = mf::make_target(model, n, 1);
        out.params["dim"] = 1;
    } else if (out.family == "nn") {
        const std::string data_path = cfg.get_string("model", "data");
        mf::Dataset data = [&] {
            try {
                return mf::load_dataset(data_path);
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
        }();
        mf::GeneralModel model = mf::make_nn_model(data, lambda, sigma);
        out.target = mf::make_target(model, n, 1 + data.input_dim());
        out.params["dim"] = 1 + data.input_dim();
        out.params["data"] = data_path;
        out.params["n_samples"] = data.size();
    } else {
        throw UsageError("model.family must be gaussian | double-well | nn (got '" + out.family +
                         "')");
    }
    return out;
}

mf::SamplerConfig load_sampler_config(const mf::KeyValueConfig& cfg) {
    mf::SamplerConfig sc;
    sc.step_size = cfg.get_double("sampler", "step_size", sc.step_size);
    sc.n_iters = cfg.get_long("sampler", "n_iters", sc.n_iters);
    sc.burn_in = cfg.get_long("sampler", "burn_in", sc.burn_in);
    sc.thinning = cfg.get_long("sampler", "thinning", sc.thinning);
    sc.friction = cfg.get_double("sampler", "friction", sc.friction);
    sc.prox_step = cfg.get_double("sampler", "prox_step", sc.prox_step);
    sc.inner_step = cfg.get_double("sampler", "inner_step", sc.inner_step);
    sc.inner_iters = cfg.get_long("sampler", "inner_iters", sc.inner_iters);
    sc.seed = static_cast<std::uint64_t>(cfg.get_long("sampler", "seed", 0));
    sc.k_out = static_cast<int>(cfg.get_long("sampler", "k_out", 1));
    return sc;
}

mf::RegularityParams load_params(const std::string& path) {
    mf::RegularityParams p;
    if (path.empty()) return p;
    mf::KeyValueConfig cfg = load_config(path);
    auto opt = [&](const char* key) -> std::optional<double> {
        if (cfg.has("params", key)) return cfg.get_double("params", key);
        return std::nullopt;
    };
    p.alpha_v = opt("alpha_v");
    p.beta_v = opt("beta_v");
    p.alpha_w = opt("alpha_w");
    p.beta_w = opt("beta_w");
    p.osc_v1 = opt("osc_v1");
    p.osc_w1 = opt("osc_w1");
    p.beta = opt("beta");
    p.b_bound = opt("b_bound");
    p.lambda = opt("lambda");
    p.clsi_pi = opt("clsi_pi");
    p.clsi_mu_n = opt("clsi_mu_n");
    p.clsi_bar = opt("clsi_bar");
    if (cfg.has("params", "sigma2")) p.sigma2 = cfg.get_double("params", "sigma2");
    return p;
}

// Deterministic SPD matrix with eigenvalues in [0.5, 2.5].
Eigen::MatrixXd random_spd(int d, mf::Rng& rng) {
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd ev(d);
    for (int i = 0; i < d; ++i) ev(i) = 0.5 + 2.0 * rng.uniform();
    return q * ev.asDiagonal() * q.transpose();
}

json make_manifest(const mf::KeyValueConfig& cfg, const std::string& sampler,
                   const json& model_params, std::uint64_t master_seed, double wall_time,
                   long long oracle_calls, std::optional<double> acceptance) {
    json m;
    m["config_digest"] = cfg.digest();
    m["master_seed"] = master_seed;
    m["sampler"] = sampler;
    m["model"] = model_params;
    m["versions"] = kVersion;
    m["wall_time"] = wall_time;  // excluded from the digest by construction
    m["rng_algorithm"] = mf::kRngAlgorithm;
    m["oracle_calls"] = oracle_calls;
    if (acceptance) m["acceptance_rate"] = *acceptance;
    return m;
}

// ---------------------------------------------------------------- plan

int cmd_plan(const std::string& metric, double eps, int d, int k, const std::string& assumptions,
             const std::string& params_path, const std::string& csv_path) {
    if (eps <= 0) throw UsageError("plan: --eps must be positive");
    mf::RegularityParams p = load_params(params_path);
    std::vector<mf::Plan> rows = mf::plan(metric, eps, d, k, assumptions, p);

    std::cout << std::left << std::setw(14) << "sampler" << std::setw(9) << "metric"
              << std::setw(26) << "M (up to polylog)" << std::setw(14) << "M" << std::setw(20)
              << "N (k=1 form)" << std::setw(14) << "N" << "\n";
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(14) << r.sampler << std::setw(9) << r.metric
                  << std::setw(26) << r.m_formula << std::setw(14) << r.m_value << std::setw(20)
                  << r.n_formula << std::setw(14) << r.n_value << "\n";
        if (r.kappa_warning)
            std::cerr << "[mfsample] warning: kappa > sqrt(d)/eps; tabulated rates assume "
                         "kappa <= sqrt(d)/eps\n";
    }
    if (!csv_path.empty()) {
        mf::CsvWriter csv(csv_path, {"sampler", "metric", "assumptions", "m_formula", "m_value",
                                     "n_formula", "n_value"});
        for (const auto& r : rows)
            csv.write_raw_row({r.sampler, r.metric, r.assumptions, r.m_formula,
                               mf::format_double(r.m_value), r.n_formula,
                               mf::format_double(r.n_value)});
    }
    return 0;
}

// ---------------------------------------------------------------- bounds

int cmd_bounds(const std::string& params_path, int n, int k, int d) {
    mf::RegularityParams p = load_params(params_path);
    auto show = [](const char* name, auto fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            std::cout << name << ": skipped (" << e.what() << ")\n";
        }
    };
    show("finite_particle_regularity", [&] {
        auto r = mf::finite_particle_regularity(p, n);
        std::cout << "finite_particle_regularity: convexity = " << r.convexity
                  << ", smoothness = " << r.smoothness << "\n";
    });
    show("lsi_bakry_emery", [&] {
        std::cout << "lsi_bakry_emery: clsi_pi <= " << mf::lsi_bakry_emery(p) << "\n";
    });
    show("lsi_holley_stroock", [&] {
        auto r = mf::lsi_holley_stroock(p, n);
        std::cout << "lsi_holley_stroock: clsi_pi <= " << r.clsi_pi_bound
                  << ", clsi_bar = " << r.clsi_bar
                  << ", weak_interaction = " << (r.weak_interaction ? "yes" : "no") << "\n";
    });
    show("weak_interaction_rho", [&] {
        auto r = mf::weak_interaction_rho(p);
        std::cout << "weak_interaction_rho: rho = " << r.rho
                  << ", satisfied = " << (r.satisfied ? "yes" : "no") << "\n";
    });
    show("lsi_proximal_gibbs", [&] {
        std::cout << "lsi_proximal_gibbs: clsi_bar <= " << mf::lsi_proximal_gibbs(p) << "\n";
    });
    show("lsi_stationary_uniform", [&] {
        auto r = mf::lsi_stationary_uniform(p, d);
        std::cout << "lsi_stationary_uniform (order of magnitude): bound = " << r.bound
                  << ", n_threshold = " << r.n_threshold << "\n";
    });
    show("poc_weak_bounds", [&] {
        auto r = mf::poc_weak_bounds(p, n, k, d);
        std::cout << "poc_weak_bounds: w2_sq <= " << r.w2_sq << ", kl <= " << r.kl << "\n";
    });
    show("poc_general_bound", [&] {
        auto r = mf::poc_general_bound(p, n, k, d);
        std::cout << "poc_general_bound: kl <= " << r.kl << ", w2_sq <= " << r.w2_sq
                  << ", n_valid = " << (r.n_valid ? "yes" : "no") << "\n";
    });
    show("condition_number(strongly_convex)", [&] {
        std::cout << "condition_number(strongly_convex) = "
                  << mf::condition_number(p, mf::KappaSetting::strongly_convex) << "\n";
    });
    show("condition_number(lsi_pairwise)", [&] {
        std::cout << "condition_number(lsi_pairwise) = "
                  << mf::condition_number(p, mf::KappaSetting::lsi_pairwise) << "\n";
    });
    show("condition_number(lsi_general)", [&] {
        std::cout << "condition_number(lsi_general) = "
                  << mf::condition_number(p, mf::KappaSetting::lsi_general) << "\n";
    });
    return 0;
}

// ---------------------------------------------------- gaussian-validate

int cmd_gaussian_validate(const std::string& config_path, const std::string& csv_path,
                          bool perturb_spectral) {
    mf::KeyValueConfig cfg = load_config(config_path);
    std::vector<long> d_list = cfg.has("experiment", "d_list")
                                   ? cfg.get_long_list("experiment", "d_list")
                                   : std::vector<long>{1, 2, 3};
    long n_min = cfg.get_long("experiment", "n_min", 2);
    long n_max = cfg.get_long("experiment", "n_max", 16);
    std::vector<double> lambda_list = cfg.has("experiment", "lambda_list")
                                          ? cfg.get_double_list("experiment", "lambda_list")
                                          : std::vector<double>{0.0, 0.1, 1.0};
    std::vector<double> sigma2_list = cfg.has("experiment", "sigma2_list")
                                          ? cfg.get_double_list("experiment", "sigma2_list")
                                          : std::vector<double>{0.5, 2.0};
    double tol = cfg.get_double("experiment", "tolerance", 1e-9);
    std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_long("experiment", "seed", 7));
    std::vector<long> slope_n = cfg.has("experiment", "slope_n_list")
                                    ? cfg.get_long_list("experiment", "slope_n_list")
                                    : std::vector<long>{8, 16, 32, 64, 128, 256, 512};
    double slope_lo = cfg.get_double("experiment", "slope_lo", -2.3);
    double slope_hi = cfg.get_double("experiment", "slope_hi", -1.8);

    std::unique_ptr<mf::CsvWriter> csv;
    const std::vector<std::string> header = {"kind",       "d",          "n",       "k",
                                             "lambda",     "sigma2",     "kl_dense", "kl_spectral",
                                             "w2sq_bures", "w2sq_bound", "slope"};
    if (!csv_path.empty()) csv = std::make_unique<mf::CsvWriter>(csv_path, header);

    mf::Rng rng(seed);
    bool ok = true;
    double worst_delta = 0.0;
    int grid_cases = 0;
    for (long d : d_list) {
        Eigen::MatrixXd a = random_spd(static_cast<int>(d), rng);
        mf::RegularityParams tp;
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
            tp.alpha_v = es.eigenvalues().minCoeff();
            tp.beta_v = es.eigenvalues().maxCoeff();
        }
        for (double lambda : lambda_list) {
            for (double sigma2 : sigma2_list) {
                for (long n = n_min; n <= n_max; ++n) {
                    mf::GaussianSpec spec;
                    spec.a = a;
                    spec.lambda = lambda;
                    spec.sigma = std::sqrt(sigma2);
                    spec.n_particles = static_cast<int>(n);
                    Eigen::MatrixXd full = mf::stationary_cov_full(spec);
                    for (long k = 1; k <= n; ++k) {
                        spec.k = static_cast<int>(k);
                        mf::GaussianDist marg;
                        marg.mean = Eigen::VectorXd::Zero(k * d);
                        marg.cov = full.topLeftCorner(k * d, k * d);
                        mf::GaussianDist prod = mf::product_law(spec, static_cast<int>(k));
                        double kl_dense = mf::kl_gaussian(marg, prod);
                        double kl_spec = mf::kl_marginal_spectral(spec);
                        if (perturb_spectral) kl_spec += 10.0 * tol + 1e-7 * std::abs(kl_spec);
                        double w2 = mf::w2_gaussian(marg, prod);
                        tp.alpha_w = lambda;
                        tp.beta_w = lambda;
                        tp.sigma2 = sigma2;
                        double bound = std::numeric_limits<double>::quiet_NaN();
                        if (lambda > 0) {
                            auto b = mf::poc_weak_bounds(tp, static_cast<int>(n),
                                                         static_cast<int>(k), static_cast<int>(d));
                            bound = b.w2_sq;
                            if (w2 * w2 > bound) {
                                ok = false;
                                std::cerr << "[mfsample] domination violated at d=" << d
                                          << " n=" << n << " k=" << k << "\n";
                            }
                        }
                        double delta = std::abs(kl_dense - kl_spec);
                        worst_delta = std::max(worst_delta, delta);
                        if (delta > tol) {
                            ok = false;
                            std::cerr << "[mfsample] oracle mismatch |delta|=" << delta
                                      << " at d=" << d << " n=" << n << " k=" << k
                                      << " lambda=" << lambda << " sigma2=" << sigma2 << "\n";
                        }
                        ++grid_cases;
                        if (csv)
                            csv->write_raw_row({"grid", std::to_string(d), std::to_string(n),
                                                std::to_string(k), mf::format_double(lambda),
                                                mf::format_double(sigma2),
                                                mf::format_double(kl_dense),
                                                mf::format_double(kl_spec),
                                                mf::format_double(w2 * w2),
                                                std::isnan(bound) ? "" : mf::format_double(bound),
                                                ""});
                    }
                }
            }
        }
        // Sharpness scaling: k = 1 fixed, lambda = 1, sigma2 = 2.
        std::vector<double> xs, ys;
        for (long n : slope_n) {
            mf::GaussianSpec spec;
            spec.a = a;
            spec.lambda = 1.0;
            spec.sigma = std::sqrt(2.0);
            spec.n_particles = static_cast<int>(n);
            spec.k = 1;
            xs.push_back(static_cast<double>(n));
            ys.push_back(mf::kl_marginal_spectral(spec));
        }
        auto fit = mf::scaling_exponent(xs, ys);
        bool slope_ok = fit.slope >= slope_lo && fit.slope <= slope_hi;
        if (!slope_ok) {
            ok = false;
            std::cerr << "[mfsample] scaling slope " << fit.slope << " outside [" << slope_lo
                      << ", " << slope_hi << "] at d=" << d << "\n";
        }
        std::cout << "slope d=" << d << ": " << mf::format_double(fit.slope)
                  << " (r2=" << mf::format_double(fit.r_squared) << ")\n";
        if (csv)
            csv->write_raw_row({"slope", std::to_string(d), "", "1", "1", "2", "", "", "", "",
                                mf::format_double(fit.slope)});
    }
    std::cout << "grid cases: " << grid_cases << ", max |kl_dense - kl_spectral| = "
              << mf::format_double(worst_delta) << "\n";
    if (!ok) throw InvariantViolation("gaussian-validate: invariant failure (see stderr)");
    std::cout << "gaussian-validate: all invariants hold\n";
    return 0;
}

// ---------------------------------------------------------------- sample

int cmd_sample(const std::string& config_path, const std::string& output_path,
               const std::string& manifest_path) {
    mf::KeyValueConfig cfg = load_config(config_path);
    LoadedModel model = load_model(cfg);
    mf::SamplerConfig sc = load_sampler_config(cfg);
    const std::string sampler_name = cfg.get_string("sampler", "algorithm", "lmc");
    mf::SamplerKind kind = mf::sampler_kind_from_string(sampler_name);
    const long n_chains = cfg.get_long("experiment", "n_chains", 1);
    if (n_chains < 1) throw UsageError("experiment.n_chains must be >= 1");

    const int k = sc.k_out;
    const int d = model.target.dim;
    std::vector<std::string> header;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < d; ++j)
            header.push_back("particle" + std::to_string(i) + "_dim" + std::to_string(j));

    auto t0 = std::chrono::steady_clock::now();
    std::vector<mf::MeanFieldSamples> chains(n_chains);
    std::vector<std::string> failures(n_chains);
#pragma omp parallel for schedule(dynamic) num_threads(mf::worker_count())
    for (long c = 0; c < n_chains; ++c) {
        try {
            mf::SamplerConfig sub = sc;
            sub.seed = (n_chains == 1) ? sc.seed : mf::derive_subseed(sc.seed, c);
            mf::Target t = model.target;  // per-chain oracle counter
            chains[c] = mf::sample_mean_field(t, kind, sub);
        } catch (const std::exception& e) {
            failures[c] = e.what();
        }
    }
    for (long c = 0; c < n_chains; ++c)
        if (!failures[c].empty())
            throw mf::DivergedChain(-1, "chain " + std::to_string(c) + ": " + failures[c]);

    mf::CsvWriter csv(output_path, header);
    std::vector<double> row(k * d);
    long long oracle_calls = 0;
    std::optional<double> acceptance;
    for (const auto& chain : chains) {
        for (const auto& s : chain.particles) {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < d; ++j) row[i * d + j] = s(i, j);
            csv.write_row(row);
        }
        oracle_calls += chain.stats.oracle_calls;
        if (chain.stats.acceptance_rate) acceptance = chain.stats.acceptance_rate;
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!manifest_path.empty()) {
        json m = make_manifest(cfg, sampler_name, model.params, sc.seed, wall, oracle_calls,
                               acceptance);
        m["n_chains"] = n_chains;
        m["retained_samples"] = csv.rows_written();
        std::ofstream out(manifest_path);
        out << m.dump(2) << "\n";
    }
    std::cout << "wrote " << csv.rows_written() << " samples to " << output_path << "\n";
    return 0;
}

// ---------------------------------------------------------------- poc-scan

int cmd_poc_scan(const std::string& config_path, const std::string& output_path) {
    mf::KeyValueConfig cfg = load_config(config_path);
    if (cfg.get_string("model", "family") != "gaussian")
        throw UsageError("poc-scan: ground truth requires the gaussian family");
    if (!cfg.has("experiment", "n_list")) throw UsageError("poc-scan: experiment.n_list required");
    std::vector<long> n_list = cfg.get_long_list("experiment", "n_list");
    if (n_list.empty()) throw UsageError("poc-scan: empty n_list");
    const int k = static_cast<int>(cfg.get_long("experiment", "k", 1));
    const std::string mode = cfg.get_string("experiment", "mode", "exact");

    const int d = static_cast<int>(cfg.get_long("model", "dim"));
    const double lambda = cfg.get_double("model", "lambda", 0.0);
    const double sigma2 = cfg.get_double("model", "sigma2", 2.0);
    Eigen::MatrixXd a = cfg.has("model", "a")
                            ? parse_matrix(cfg.get_string("model", "a"), d, "model.a")
                            : cfg.get_double("model", "a_scale", 1.0) *
                                  Eigen::MatrixXd::Identity(d, d);
    mf::RegularityParams tp;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        tp.alpha_v = es.eigenvalues().minCoeff();
        tp.beta_v = es.eigenvalues().maxCoeff();
    }
    tp.alpha_w = lambda;
    tp.beta_w = lambda;
    tp.sigma2 = sigma2;

    mf::CsvWriter csv(output_path, {"n", "k", "metric_value", "theory_bound", "ratio"});
    std::vector<double> xs, ys;
    bool all_ok = true;
    for (long n : n_list) {
        mf::GaussianSpec spec;
        spec.a = a;
        spec.lambda = lambda;
        spec.sigma = std::sqrt(sigma2);
        spec.n_particles = static_cast<int>(n);
        spec.k = k;

        double metric_value;
        if (mode == "exact") {
            mf::GaussianDist marg = mf::marginal_law(spec, k);
            mf::GaussianDist prod = mf::product_law(spec, k);
            double w2 = mf::w2_gaussian(marg, prod);
            metric_value = w2 * w2;
        } else if (mode == "empirical") {
            mf::SamplerConfig sc = load_sampler_config(cfg);
            sc.k_out = k;
            mf::PairwiseModel model = mf::make_gaussian_pairwise(a, lambda, std::sqrt(sigma2));
            mf::Target t = mf::make_target(model, static_cast<int>(n), d);
            auto mfs = mf::sample_mean_field(t, mf::SamplerKind::mala, sc);
            std::vector<Eigen::VectorXd> cloud;
            for (const auto& s : mfs.particles) {
                Eigen::VectorXd v(k * d);
                for (int i = 0; i < k; ++i) v.segment(i * d, d) = s.row(i).transpose();
                cloud.push_back(v);
            }
            if (cloud.size() > 2048) cloud.resize(2048);
            // Reference cloud: exact draws from the product law.
            mf::GaussianDist prod = mf::product_law(spec, k);
            Eigen::LLT<Eigen::MatrixXd> llt(prod.cov);
            mf::Rng rng(mf::derive_subseed(sc.seed, 0xC0FFEE));
            std::vector<Eigen::VectorXd> ref;
            for (size_t i = 0; i < cloud.size(); ++i) {
                Eigen::VectorXd z(k * d);
                for (int j = 0; j < k * d; ++j) z(j) = rng.normal();
                ref.push_back(Eigen::MatrixXd(llt.matrixL()) * z);
            }
            metric_value = mf::empirical_w2sq(cloud, ref);
        } else {
            throw UsageError("poc-scan: experiment.mode must be exact or empirical");
        }

        auto b = mf::poc_weak_bounds(tp, static_cast<int>(n), k, d);
        auto rep = mf::bound_report(metric_value, b.w2_sq);
        if (!rep.satisfied && mode == "exact") all_ok = false;
        csv.write_row({static_cast<double>(n), static_cast<double>(k), metric_value, b.w2_sq,
                       rep.ratio});
        xs.push_back(static_cast<double>(n));
        ys.push_back(metric_value);
    }
    if (xs.size() >= 3 && *std::min_element(ys.begin(), ys.end()) > 0) {
        auto fit = mf::scaling_exponent(xs, ys);
        std::cout << "slope=" << mf::format_double(fit.slope) << "\n";
    }
    if (!all_ok)
        throw InvariantViolation("poc-scan: theory bound violated by exact metric");
    return 0;
}

// ---------------------------------------------------------------- nn-train

int cmd_nn_train(const std::string& data_path, int neurons, double sigma2, double lambda,
                 const std::string& sampler, long steps, double step_size, std::uint64_t seed,
                 const std::string& output_path, long log_every, long grad_check_every) {
    if (neurons < 1) throw UsageError("nn-train: --neurons must be >= 1");
    if (steps < 1) throw UsageError("nn-train: --steps must be >= 1");
    if (step_size <= 0) throw UsageError("nn-train: --step-size must be positive");
    mf::Dataset data = [&] {
        try {
            return mf::load_dataset(data_path);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }();
    mf::GeneralModel model = mf::make_nn_model(data, lambda, std::sqrt(sigma2));
    const int dim = 1 + data.input_dim();

    mf::SamplerKind kind = mf::sampler_kind_from_string(sampler);
    if (kind != mf::SamplerKind::lmc && kind != mf::SamplerKind::ulmc)
        throw UsageError("nn-train: --sampler must be lmc or ulmc");

    mf::Rng rng(seed);
    Eigen::MatrixXd x(neurons, dim);
    for (int i = 0; i < neurons; ++i)
        for (int j = 0; j < dim; ++j) x(i, j) = rng.normal();

    auto objective = [&](const Eigen::MatrixXd& state) {
        mf::ParticleState ps(state);
        double f0 = mf::nn_f0(ps, data);
        double reg = 0.5 * lambda * state.squaredNorm() / neurons;
        return std::make_pair(f0, f0 + reg);
    };
    // Relative gap between the block gradient of N*F0 and the intrinsic
    // gradient, by central differences.
    auto grad_residual = [&](const Eigen::MatrixXd& state) {
        mf::ParticleState ps(state);
        double worst = 0.0;
        for (int i = 0; i < neurons; ++i) {
            Eigen::VectorXd intrinsic = mf::nn_w2_grad(ps, state.row(i).transpose(), data);
            auto f = [&](const Eigen::VectorXd& theta) {
                Eigen::MatrixXd s = state;
                s.row(i) = theta.transpose();
                return neurons * mf::nn_f0(mf::ParticleState(s), data);
            };
            Eigen::VectorXd fd = mf::central_gradient(f, state.row(i).transpose());
            worst = std::max(worst, (intrinsic - fd).norm() / std::max(1.0, fd.norm()));
        }
        return worst;
    };

    mf::Target target = mf::make_target(model, neurons, dim);
    mf::CsvWriter csv(output_path, {"step", "f0", "objective", "grad_residual"});
    auto log_row = [&](long step, const Eigen::MatrixXd& state) {
        auto [f0, obj] = objective(state);
        double res = std::numeric_limits<double>::quiet_NaN();
        if (step == 0 || (grad_check_every > 0 && step % grad_check_every == 0) || step == steps)
            res = grad_residual(state);
        csv.write_row({static_cast<double>(step), f0, obj, res});
        return f0;
    };
    double f0_start = log_row(0, x);

    mf::SamplerConfig sc;
    sc.step_size = step_size;
    sc.n_iters = log_every;
    sc.burn_in = 0;
    sc.thinning = log_every;
    sc.seed = seed;
    double f0_last = f0_start;
    for (long done = 0; done < steps;) {
        long chunk = std::min(log_every, steps - done);
        sc.n_iters = chunk;
        sc.thinning = chunk;
        sc.seed = mf::derive_subseed(seed, static_cast<std::uint64_t>(done));
        mf::ChainOutput out = (kind == mf::SamplerKind::lmc) ? mf::run_lmc(target, sc, x)
                                                             : mf::run_ulmc(target, sc, x);
        x = out.final_state;
        done += chunk;
        f0_last = log_row(done, x);
    }
    std::cout << "f0: " << mf::format_double(f0_start) << " -> " << mf::format_double(f0_last)
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) + " - sampling from mean-field stationary distributions"};
    app.require_subcommand(1);

    // plan
    std::string plan_metric = "w2", plan_assumptions = "sharp", plan_params, plan_csv;
    double plan_eps = 0.1;
    int plan_d = 1, plan_k = 1;
    auto* plan_cmd = app.add_subcommand("plan", "oracle-complexity planner");
    plan_cmd->add_option("--metric", plan_metric, "w2 | sqrt_kl");
    plan_cmd->add_option("--eps", plan_eps, "target accuracy")->required();
    plan_cmd->add_option("--d", plan_d, "dimension")->required();
    plan_cmd->add_option("--k", plan_k, "output particles");
    plan_cmd->add_option("--assumptions", plan_assumptions,
                         "sharp | sharp-convex | strongly-convex | general");
    plan_cmd->add_option("--params", plan_params, "params file with [params] section");
    plan_cmd->add_option("--csv", plan_csv, "also write rows as CSV");

    // bounds
    std::string bounds_params;
    int bounds_n = 100, bounds_k = 1, bounds_d = 1;
    auto* bounds_cmd = app.add_subcommand("bounds", "bound and constant calculators");
    bounds_cmd->add_option("--params", bounds_params, "params file")->required();
    bounds_cmd->add_option("--n", bounds_n, "particle count");
    bounds_cmd->add_option("--k", bounds_k, "marginal size");
    bounds_cmd->add_option("--d", bounds_d, "dimension");

    // gaussian-validate
    std::string gv_config, gv_csv;
    bool gv_perturb = false;
    auto* gv_cmd = app.add_subcommand("gaussian-validate", "closed-form oracle cross-checks");
    gv_cmd->add_option("--config", gv_config, "experiment config")->required();
    gv_cmd->add_option("--csv", gv_csv, "output CSV path");
    gv_cmd->add_flag("--perturb-spectral", gv_perturb,
                     "inject a fault into the spectral route (self-test)");

    // sample
    std::string sample_config, sample_output, sample_manifest;
    auto* sample_cmd = app.add_subcommand("sample", "run a sampler, write retained particles");
    sample_cmd->add_option("--config", sample_config, "model+sampler config")->required();
    sample_cmd->add_option("--output", sample_output, "samples CSV")->required();
    sample_cmd->add_option("--manifest", sample_manifest, "manifest JSON path");

    // poc-scan
    std::string poc_config, poc_output;
    auto* poc_cmd = app.add_subcommand("poc-scan", "bias vs bound over a particle-count sweep");
    poc_cmd->add_option("--config", poc_config, "config with model + experiment.n_list")->required();
    poc_cmd->add_option("--output", poc_output, "output CSV")->required();

    // nn-train
    std::string nn_data, nn_sampler = "lmc", nn_output = "nn_metrics.csv";
    int nn_neurons = 5;
    double nn_sigma2 = 0.01, nn_lambda = 0.01, nn_step = 0.05;
    long nn_steps = 2000, nn_log_every = 100, nn_grad_every = 0;
    std::uint64_t nn_seed = 0;
    auto* nn_cmd = app.add_subcommand("nn-train", "noisy gradient descent on the network model");
    nn_cmd->add_option("--data", nn_data, "dataset file")->required();
    nn_cmd->add_option("--neurons", nn_neurons, "number of neuron particles");
    nn_cmd->add_option("--sigma2", nn_sigma2, "noise level sigma^2");
    nn_cmd->add_option("--lambda", nn_lambda, "weight decay");
    nn_cmd->add_option("--sampler", nn_sampler, "lmc | ulmc");
    nn_cmd->add_option("--steps", nn_steps, "total steps");
    nn_cmd->add_option("--step-size", nn_step, "step size");
    nn_cmd->add_option("--seed", nn_seed, "seed");
    nn_cmd->add_option("--output", nn_output, "metrics CSV");
    nn_cmd->add_option("--log-every", nn_log_every, "metric logging stride");
    nn_cmd->add_option("--grad-check-every", nn_grad_every,
                       "finite-difference residual stride (0: step 0 and final only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (plan_cmd->parsed())
            return cmd_plan(plan_metric, plan_eps, plan_d, plan_k, plan_assumptions, plan_params,
                            plan_csv);
        if (bounds_cmd->parsed()) return cmd_bounds(bounds_params, bounds_n, bounds_k, bounds_d);
        if (gv_cmd->parsed()) return cmd_gaussian_validate(gv_config, gv_csv, gv_perturb);
        if (sample_cmd->parsed()) return cmd_sample(sample_config, sample_output, sample_manifest);
        if (poc_cmd->parsed()) return cmd_poc_scan(poc_config, poc_output);
        if (nn_cmd->parsed())
            return cmd_nn_train(nn_data, nn_neurons, nn_sigma2, nn_lambda, nn_sampler, nn_steps,
                                nn_step, nn_seed, nn_output, nn_log_every, nn_grad_every);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvariantViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const mf::DivergedChain& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
