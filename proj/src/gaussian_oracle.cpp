#include "meanfield/gaussian_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace meanfield {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Eigen-decomposition of a symmetric matrix with explicit symmetrization.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("gaussian_oracle: symmetric eigensolve failed");
    return es;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    auto es = sym_eig(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10) throw std::runtime_error("gaussian_oracle: matrix is not PSD");
        ev(i) = std::sqrt(std::max(0.0, ev(i)));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void GaussianSpec::validate() const {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw std::invalid_argument("GaussianSpec: A must be square");
    if (!a.isApprox(a.transpose(), 1e-12))
        throw std::invalid_argument("GaussianSpec: A must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(a));
    if (es.eigenvalues().minCoeff() <= 0)
        throw std::invalid_argument("GaussianSpec: A must be positive definite");
    if (lambda < 0) throw std::invalid_argument("GaussianSpec: lambda >= 0 required");
    if (sigma <= 0) throw std::invalid_argument("GaussianSpec: sigma > 0 required");
    if (n_particles < 2) throw std::invalid_argument("GaussianSpec: N >= 2 required");
    if (k < 1 || k > n_particles) throw std::invalid_argument("GaussianSpec: k in [1, N] required");
}

Eigen::MatrixXd interaction_matrix(int n) {
    return n * Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Ones(n, n);
}

Eigen::MatrixXd precision_full(const GaussianSpec& spec) {
    spec.validate();
    const int n = spec.n_particles;
    const int d = spec.dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * d, n * d);
    Eigen::MatrixXd c = interaction_matrix(n);
    const double eps = spec.lambda / (n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Eigen::MatrixXd block = eps * c(i, j) * Eigen::MatrixXd::Identity(d, d);
            if (i == j) block += spec.a;
            h.block(i * d, j * d, d, d) = block;
        }
    }
    return h;
}

Eigen::MatrixXd stationary_cov_full(const GaussianSpec& spec) {
    Eigen::MatrixXd h = precision_full(spec);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("stationary_cov_full: dense solve failed (H not SPD?)");
    const int m = static_cast<int>(h.rows());
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    return symmetrized(0.5 * spec.sigma * spec.sigma * inv);
}

Eigen::MatrixXd mean_field_cov(const GaussianSpec& spec) {
    spec.validate();
    const int d = spec.dim();
    Eigen::MatrixXd m = spec.a + spec.lambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("mean_field_cov: solve failed");
    return symmetrized(0.5 * spec.sigma * spec.sigma *
                       llt.solve(Eigen::MatrixXd::Identity(d, d)));
}

GaussianDist marginal_law(const GaussianSpec& spec, int k) {
    if (k < 1 || k > spec.n_particles)
        throw std::invalid_argument("marginal_law: k in [1, N] required");
    const int d = spec.dim();
    Eigen::MatrixXd full = stationary_cov_full(spec);
    GaussianDist out;
    out.mean = Eigen::VectorXd::Zero(k * d);
    out.cov = full.topLeftCorner(k * d, k * d);
    return out;
}

GaussianDist product_law(const GaussianSpec& spec, int k) {
    if (k < 1) throw std::invalid_argument("product_law: k >= 1 required");
    const int d = spec.dim();
    Eigen::MatrixXd s2 = mean_field_cov(spec);
    GaussianDist out;
    out.mean = Eigen::VectorXd::Zero(k * d);
    out.cov = Eigen::MatrixXd::Zero(k * d, k * d);
    for (int i = 0; i < k; ++i) out.cov.block(i * d, i * d, d, d) = s2;
    return out;
}

double kl_gaussian(const GaussianDist& p, const GaussianDist& q) {
    const auto dim = p.cov.rows();
    if (q.cov.rows() != dim || p.mean.size() != dim || q.mean.size() != dim)
        throw std::invalid_argument("kl_gaussian: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> lq(symmetrized(q.cov));
    if (lq.info() != Eigen::Success)
        throw std::invalid_argument("kl_gaussian: q covariance not invertible");
    Eigen::MatrixXd ratio = lq.solve(p.cov);  // q.cov^{-1} p.cov
    double trace = ratio.trace();

    double logdet_p, logdet_q;
    {
        Eigen::LLT<Eigen::MatrixXd> lp(symmetrized(p.cov));
        if (lp.info() != Eigen::Success)
            throw std::invalid_argument("kl_gaussian: p covariance not SPD");
        logdet_p = 2.0 * Eigen::MatrixXd(lp.matrixL()).diagonal().array().log().sum();
        logdet_q = 2.0 * Eigen::MatrixXd(lq.matrixL()).diagonal().array().log().sum();
    }
    Eigen::VectorXd dm = p.mean - q.mean;
    double mean_term = dm.dot(lq.solve(dm));
    return 0.5 * (-(logdet_p - logdet_q) - static_cast<double>(dim) + trace + mean_term);
}

double kl_marginal_spectral(const GaussianSpec& spec) {
    spec.validate();
    const int n = spec.n_particles;
    const int k = spec.k;
    const double eps = spec.lambda / (n - 1);
    if (eps == 0.0) return 0.0;

    auto es = sym_eig(spec.a);
    double kl = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double s = es.eigenvalues()(i);
        const double di = s + spec.lambda + eps;
        const double eta0 = eps / di;
        const double etap = eps / di - k * eps * (s + spec.lambda) / (di * s);
        for (double eta : {etap, eta0}) {
            if (eta >= 1.0)
                throw std::domain_error("kl_marginal_spectral: eigenvalue eta >= 1");
        }
        // -(1/2) (log(1-eta) + eta), once for eta+, (k-1) times for eta0.
        kl += -0.5 * (std::log1p(-etap) + etap);
        kl += -0.5 * (k - 1) * (std::log1p(-eta0) + eta0);
    }
    return kl;
}

double w2_gaussian(const GaussianDist& p, const GaussianDist& q) {
    if (p.cov.rows() != q.cov.rows() || p.mean.size() != q.mean.size())
        throw std::invalid_argument("w2_gaussian: dimension mismatch");
    Eigen::MatrixXd qs = psd_sqrt(q.cov);
    Eigen::MatrixXd cross = psd_sqrt(symmetrized(qs * p.cov * qs));
    double w2sq = (p.mean - q.mean).squaredNorm() + p.cov.trace() + q.cov.trace() -
                  2.0 * cross.trace();
    return std::sqrt(std::max(0.0, w2sq));
}

Eigen::MatrixXd lmc_stationary_cov(const GaussianSpec& spec, double h) {
    if (h <= 0) throw std::domain_error("lmc_stationary_cov: h > 0 required");
    Eigen::MatrixXd hm = precision_full(spec);
    auto es = sym_eig(hm);
    Eigen::VectorXd mu = es.eigenvalues();
    Eigen::VectorXd var(mu.size());
    const double s2 = spec.sigma * spec.sigma;
    for (int i = 0; i < mu.size(); ++i) {
        if (mu(i) <= 0 || h * mu(i) >= 2.0)
            throw std::domain_error("lmc_stationary_cov: unstable step size (need 0 < h*mu < 2)");
        var(i) = s2 / (mu(i) * (2.0 - h * mu(i)));
    }
    return symmetrized(es.eigenvectors() * var.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace meanfield
