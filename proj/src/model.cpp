#include "meanfield/model.hpp"

#include <cmath>
#include <vector>

#include "meanfield/parallel.hpp"
#include "meanfield/rng.hpp"

namespace meanfield {

namespace {

void require_interacting(const ParticleState& state) {
    if (state.n_particles() < 2)
        throw std::invalid_argument("pairwise model: N >= 2 required (the 1/(N-1) neighbor average needs a neighbor)");
}

}  // namespace

Eigen::MatrixXd pairwise_drift_serial(const PairwiseModel& model, const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Eigen::MatrixXd drift(n, d);
    const double inv = 1.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = x.row(i).transpose();
        Eigen::VectorXd row = model.grad_v(xi);
        Eigen::VectorXd inter = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            inter += model.grad_w(xi - x.row(j).transpose());
        }
        row += inv * inter;
        if (!row.allFinite())
            throw EvaluationError("pairwise_drift: non-finite gradient at particle " + std::to_string(i), i);
        drift.row(i) = -row.transpose();
    }
    return drift;
}

Eigen::MatrixXd pairwise_drift(const PairwiseModel& model, const ParticleState& state) {
    require_interacting(state);
    const Eigen::MatrixXd& x = state.matrix();
    const int n = state.n_particles();
    const int d = state.dim();
    Eigen::MatrixXd drift(n, d);
    const double inv = 1.0 / (n - 1);

    // Parallel over particles; the inner neighbor sum stays in index order so
    // every row is bit-identical at any worker count.
    int bad = -1;
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = x.row(i).transpose();
        Eigen::VectorXd row = model.grad_v(xi);
        Eigen::VectorXd inter = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            inter += model.grad_w(xi - x.row(j).transpose());
        }
        row += inv * inter;
        if (!row.allFinite()) {
#pragma omp critical
            bad = (bad < 0) ? i : std::min(bad, i);
        }
        drift.row(i) = -row.transpose();
    }
    if (bad >= 0)
        throw EvaluationError("pairwise_drift: non-finite gradient at particle " + std::to_string(bad), bad);
    return drift;
}

double pairwise_log_density_serial(const PairwiseModel& model, const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    const double s2 = model.sigma * model.sigma;
    // Same reduction order as the parallel kernel: per-particle subtotals
    // first, then a serial sum over particles.
    double conf = 0.0, inter = 0.0;
    for (int i = 0; i < n; ++i) {
        conf += model.v(x.row(i).transpose());
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            s += model.w(x.row(i).transpose() - x.row(j).transpose());
        }
        inter += s;
    }
    double value = -(2.0 / s2) * conf - inter / (s2 * (n - 1));
    if (!std::isfinite(value))
        throw EvaluationError("pairwise_log_density: non-finite potential value");
    return value;
}

double pairwise_log_density(const PairwiseModel& model, const ParticleState& state) {
    require_interacting(state);
    const Eigen::MatrixXd& x = state.matrix();
    const int n = state.n_particles();
    const double s2 = model.sigma * model.sigma;

    // Per-particle partial sums, reduced serially in index order afterwards.
    std::vector<double> conf(n), inter(n);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = x.row(i).transpose();
        conf[i] = model.v(xi);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            s += model.w(xi - x.row(j).transpose());
        }
        inter[i] = s;
    }
    double conf_sum = 0.0, inter_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        conf_sum += conf[i];
        inter_sum += inter[i];
    }
    double value = -(2.0 / s2) * conf_sum - inter_sum / (s2 * (n - 1));
    if (!std::isfinite(value))
        throw EvaluationError("pairwise_log_density: non-finite potential value");
    return value;
}

Eigen::MatrixXd pairwise_score(const PairwiseModel& model, const ParticleState& state) {
    return (2.0 / (model.sigma * model.sigma)) * pairwise_drift(model, state);
}

Eigen::MatrixXd general_drift(const GeneralModel& model, const ParticleState& state) {
    const Eigen::MatrixXd& x = state.matrix();
    const int n = state.n_particles();
    Eigen::MatrixXd grads;
    if (model.w2_grad_all) {
        grads = model.w2_grad_all(state);
    } else {
        grads.resize(n, state.dim());
        for (int i = 0; i < n; ++i)
            grads.row(i) = model.w2_grad(state, state.particle(i)).transpose();
    }
    if (!grads.allFinite()) {
        int bad = 0;
        for (int i = 0; i < n; ++i)
            if (!grads.row(i).allFinite()) { bad = i; break; }
        throw EvaluationError("general_drift: non-finite functional gradient at particle " + std::to_string(bad), bad);
    }
    return -(grads + model.lambda * x);
}

double general_log_density(const GeneralModel& model, const ParticleState& state) {
    const double s2 = model.sigma * model.sigma;
    double f0 = model.f0(state);
    if (!std::isfinite(f0))
        throw EvaluationError("general_log_density: non-finite F0 value");
    return -(2.0 * state.n_particles() / s2) * f0 - (model.lambda / s2) * state.matrix().squaredNorm();
}

Eigen::MatrixXd general_score(const GeneralModel& model, const ParticleState& state) {
    return (2.0 / (model.sigma * model.sigma)) * general_drift(model, state);
}

PairwiseModel make_gaussian_pairwise(const Eigen::MatrixXd& a, double lambda, double sigma) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("make_gaussian_pairwise: A must be square");
    if (!a.isApprox(a.transpose(), 1e-12))
        throw std::invalid_argument("make_gaussian_pairwise: A must be symmetric");
    if (lambda < 0) throw std::invalid_argument("make_gaussian_pairwise: lambda >= 0 required");
    if (sigma <= 0) throw std::invalid_argument("make_gaussian_pairwise: sigma > 0 required");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("make_gaussian_pairwise: eigensolve failed");
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0)
        throw std::invalid_argument("make_gaussian_pairwise: A must be positive definite");

    Eigen::MatrixXd a_sym = 0.5 * (a + a.transpose());
    PairwiseModel m;
    m.name = "gaussian";
    m.v = [a_sym](const Eigen::VectorXd& x) { return 0.5 * x.dot(a_sym * x); };
    m.grad_v = [a_sym](const Eigen::VectorXd& x) { return Eigen::VectorXd(a_sym * x); };
    m.w = [lambda](const Eigen::VectorXd& x) { return 0.5 * lambda * x.squaredNorm(); };
    m.grad_w = [lambda](const Eigen::VectorXd& x) { return Eigen::VectorXd(lambda * x); };
    m.sigma = sigma;
    m.constants.alpha_v = lo;
    m.constants.beta_v = hi;
    m.constants.alpha_w = lambda;
    m.constants.beta_w = lambda;
    return m;
}

PairwiseModel make_double_well_pairwise(double lambda, double sigma) {
    if (lambda < 0) throw std::invalid_argument("make_double_well_pairwise: lambda >= 0 required");
    if (sigma <= 0) throw std::invalid_argument("make_double_well_pairwise: sigma > 0 required");
    PairwiseModel m;
    m.name = "double-well";
    m.v = [](const Eigen::VectorXd& x) {
        double t = x(0);
        return 0.25 * t * t * t * t - 0.5 * t * t + 0.25;
    };
    m.grad_v = [](const Eigen::VectorXd& x) {
        double t = x(0);
        Eigen::VectorXd g(1);
        g(0) = t * t * t - t;
        return g;
    };
    m.w = [lambda](const Eigen::VectorXd& x) { return 0.5 * lambda * x.squaredNorm(); };
    m.grad_w = [lambda](const Eigen::VectorXd& x) { return Eigen::VectorXd(lambda * x); };
    m.sigma = sigma;
    m.constants.alpha_v = -1.0;  // V'' = 3x^2 - 1 >= -1; no global beta_V
    m.constants.alpha_w = lambda;
    m.constants.beta_w = lambda;
    return m;
}

GeneralModel pairwise_as_general(const PairwiseModel& model) {
    GeneralModel g;
    g.name = model.name + "-as-general";
    g.sigma = model.sigma;
    g.lambda = 0.0;
    g.f0 = [model](const ParticleState& state) {
        const Eigen::MatrixXd& x = state.matrix();
        const int n = state.n_particles();
        double conf = 0.0, inter = 0.0;
        for (int i = 0; i < n; ++i) {
            conf += model.v(x.row(i).transpose());
            for (int j = 0; j < n; ++j)
                inter += model.w(x.row(i).transpose() - x.row(j).transpose());
        }
        return conf / n + 0.5 * inter / (static_cast<double>(n) * n);
    };
    g.w2_grad = [model](const ParticleState& state, const Eigen::VectorXd& point) {
        const Eigen::MatrixXd& x = state.matrix();
        const int n = state.n_particles();
        Eigen::VectorXd grad = model.grad_v(point);
        Eigen::VectorXd inter = Eigen::VectorXd::Zero(point.size());
        for (int j = 0; j < n; ++j)
            inter += model.grad_w(point - x.row(j).transpose());
        return Eigen::VectorXd(grad + inter / n);
    };
    return g;
}

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x) {
    const double h = 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x, xm = x;
    for (int i = 0; i < x.size(); ++i) {
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return g;
}

GradientCheck check_pairwise_gradients(const PairwiseModel& model, int dim, int n_points,
                                       std::uint64_t seed) {
    Rng rng(seed);
    GradientCheck out;
    auto rel_err = [](const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
        double denom = std::max(1.0, want.norm());
        return (got - want).norm() / denom;
    };
    for (int p = 0; p < n_points; ++p) {
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x(i) = rng.normal();
        out.max_rel_error_v = std::max(out.max_rel_error_v, rel_err(model.grad_v(x), central_gradient(model.v, x)));
        out.max_rel_error_w = std::max(out.max_rel_error_w, rel_err(model.grad_w(x), central_gradient(model.w, x)));
        out.max_evenness_defect = std::max(out.max_evenness_defect,
                                           std::abs(model.w(x) - model.w(Eigen::VectorXd(-x))));
    }
    return out;
}

}  // namespace meanfield
