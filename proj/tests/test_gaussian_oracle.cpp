#include <doctest.h>

#include <cmath>

#include "meanfield/gaussian_oracle.hpp"
#include "meanfield/rng.hpp"
#include "oracles.hpp"

using namespace meanfield;

namespace {

GaussianSpec spec_1d(double lambda = 1.0, double sigma2 = 2.0, int n = 2, int k = 1) {
    GaussianSpec s;
    s.a = Eigen::MatrixXd::Identity(1, 1);
    s.lambda = lambda;
    s.sigma = std::sqrt(sigma2);
    s.n_particles = n;
    s.k = k;
    return s;
}

Eigen::MatrixXd random_spd(int d, Rng& rng) {
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    Eigen::MatrixXd a = g * g.transpose() / d + 0.4 * Eigen::MatrixXd::Identity(d, d);
    return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_CASE("stationary covariance: hand 2x2 and no-interaction cases") {
    // d=1, A=1, lambda=1, sigma^2=2, N=2: Sigma_1 = [[2/3, 1/3], [1/3, 2/3]].
    auto s = spec_1d();
    Eigen::MatrixXd cov = stationary_cov_full(s);
    CHECK(cov(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(cov(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(cov(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // lambda = 0: block diagonal I_N (x) (sigma^2/2) A^{-1}.
    Rng rng(5);
    GaussianSpec s2;
    s2.a = random_spd(2, rng);
    s2.lambda = 0.0;
    s2.sigma = std::sqrt(0.5);
    s2.n_particles = 3;
    s2.k = 1;
    Eigen::MatrixXd full = stationary_cov_full(s2);
    Eigen::MatrixXd block = mean_field_cov(s2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXd want = (i == j) ? block : Eigen::MatrixXd::Zero(2, 2);
            CHECK((full.block(i * 2, j * 2, 2, 2) - want).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("stationary covariance is exchangeable") {
    Rng rng(9);
    GaussianSpec s;
    s.a = random_spd(2, rng);
    s.lambda = 0.7;
    s.sigma = 1.1;
    s.n_particles = 4;
    s.k = 1;
    Eigen::MatrixXd full = stationary_cov_full(s);
    // Swap particle blocks 1 and 3 on both sides: unchanged.
    std::vector<int> perm = {0, 3, 2, 1};
    Eigen::MatrixXd permuted(8, 8);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            permuted.block(i * 2, j * 2, 2, 2) = full.block(perm[i] * 2, perm[j] * 2, 2, 2);
    CHECK((permuted - full).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mean-field covariance: scalar fixtures and eigenbasis alignment") {
    auto s = spec_1d();
    CHECK(mean_field_cov(s)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

    GaussianSpec si;
    si.a = Eigen::MatrixXd::Identity(3, 3);
    si.lambda = 0.0;
    si.sigma = std::sqrt(2.0);
    si.n_particles = 2;
    si.k = 1;
    CHECK((mean_field_cov(si) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);

    // Sigma_2 diagonalizes in A's eigenbasis.
    Rng rng(31);
    GaussianSpec sr;
    sr.a = random_spd(3, rng);
    sr.lambda = 0.3;
    sr.sigma = 1.0;
    sr.n_particles = 2;
    sr.k = 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sr.a);
    Eigen::MatrixXd rotated =
        es.eigenvectors().transpose() * mean_field_cov(sr) * es.eigenvectors();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(rotated(i, j)) < 1e-12);
}

TEST_CASE("kl_gaussian: zero at equality, hand fixtures") {
    Rng rng(3);
    GaussianDist p;
    p.mean = Eigen::VectorXd::Zero(3);
    p.cov = random_spd(3, rng);
    CHECK(kl_gaussian(p, p) == doctest::Approx(0.0).epsilon(1e-12));

    // d=1, A=1, lambda=1, sigma^2=2, N=2: KL fixtures from the dense route.
    auto s = spec_1d(1.0, 2.0, 2, 2);
    double kl2 = kl_gaussian(marginal_law(s, 2), product_law(s, 2));
    CHECK(kl2 == doctest::Approx(0.5 * (8.0 / 3.0 - 2.0 - std::log(4.0 / 3.0))).epsilon(1e-10));
    CHECK(kl2 == doctest::Approx(0.18951).epsilon(1e-3));

    double kl1 = kl_gaussian(marginal_law(s, 1), product_law(s, 1));
    CHECK(kl1 == doctest::Approx(0.5 * (4.0 / 3.0 - 1.0 - std::log(4.0 / 3.0))).epsilon(1e-10));
    CHECK(kl1 == doctest::Approx(0.022824).epsilon(1e-3));

    GaussianDist q = p;
    q.mean = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(kl_gaussian(p, q), std::invalid_argument);
}

TEST_CASE("spectral KL: fixture eta = -1/3 and the dense-route agreement grid") {
    auto s = spec_1d(1.0, 2.0, 2, 1);
    // eps = 1, d_1 = 3, eta+ = 1/3 - 2/3 = -1/3.
    CHECK(kl_marginal_spectral(s) ==
          doctest::Approx(0.5 * (1.0 / 3.0 - std::log(4.0 / 3.0))).epsilon(1e-12));

    auto s0 = spec_1d(0.0);
    CHECK(kl_marginal_spectral(s0) == 0.0);

    Rng rng(13);
    double worst = 0.0;
    for (int d : {1, 2, 3}) {
        Eigen::MatrixXd a = random_spd(d, rng);
        for (double lambda : {0.0, 0.1, 1.0}) {
            for (double sigma2 : {0.5, 2.0}) {
                for (int n = 2; n <= 16; ++n) {
                    GaussianSpec spec{a, lambda, std::sqrt(sigma2), n, 1};
                    Eigen::MatrixXd full = stationary_cov_full(spec);
                    for (int k = 1; k <= n; ++k) {
                        spec.k = k;
                        GaussianDist marg;
                        marg.mean = Eigen::VectorXd::Zero(k * d);
                        marg.cov = full.topLeftCorner(k * d, k * d);
                        double dense = kl_gaussian(marg, product_law(spec, k));
                        double spectral = kl_marginal_spectral(spec);
                        worst = std::max(worst, std::abs(dense - spectral));
                    }
                }
            }
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("monotone marginalization: KL nondecreasing in k") {
    Rng rng(19);
    GaussianSpec spec;
    spec.a = random_spd(2, rng);
    spec.lambda = 0.8;
    spec.sigma = std::sqrt(2.0);
    spec.n_particles = 8;
    double prev = 0.0;
    for (int k = 1; k <= 8; ++k) {
        spec.k = k;
        double kl = kl_marginal_spectral(spec);
        CHECK(kl >= prev - 1e-12);
        prev = kl;
    }
}

TEST_CASE("bures distance: identity, 1-d, translation, triangle inequality") {
    Rng rng(7);
    GaussianDist p, q;
    p.mean = Eigen::VectorXd::Zero(2);
    p.cov = random_spd(2, rng);
    CHECK(w2_gaussian(p, p) == doctest::Approx(0.0).epsilon(1e-10));

    // Commuting 1-d case: |sqrt(s1) - sqrt(s2)|.
    GaussianDist a, b;
    a.mean = Eigen::VectorXd::Zero(1);
    b.mean = Eigen::VectorXd::Zero(1);
    a.cov = Eigen::MatrixXd::Constant(1, 1, 2.25);
    b.cov = Eigen::MatrixXd::Constant(1, 1, 0.25);
    CHECK(w2_gaussian(a, b) == doctest::Approx(1.0).epsilon(1e-12));

    // Translation adds |v|^2 under the square root.
    q = p;
    q.mean = Eigen::VectorXd::Ones(2) * 3.0;
    CHECK(w2_gaussian(p, q) == doctest::Approx(std::sqrt(18.0)).epsilon(1e-12));

    // Symmetry and triangle inequality on random triples.
    for (int t = 0; t < 10; ++t) {
        GaussianDist x{Eigen::VectorXd::Zero(2), random_spd(2, rng)};
        GaussianDist y{Eigen::VectorXd::Zero(2), random_spd(2, rng)};
        GaussianDist z{Eigen::VectorXd::Zero(2), random_spd(2, rng)};
        double xy = w2_gaussian(x, y), yx = w2_gaussian(y, x);
        CHECK(xy == doctest::Approx(yx).epsilon(1e-10));
        CHECK(w2_gaussian(x, z) <= xy + w2_gaussian(y, z) + 1e-10);
    }
}

TEST_CASE("lmc stationary covariance: limits, fixture, Lyapunov residual") {
    auto s = spec_1d(1.0, 2.0, 2, 1);
    // h -> 0 recovers Sigma_1.
    Eigen::MatrixXd near = lmc_stationary_cov(s, 1e-6);
    Eigen::MatrixXd sigma1 = stationary_cov_full(s);
    CHECK((near - sigma1).cwiseAbs().maxCoeff() / sigma1.norm() < 1e-5);

    // d=1, N=2: modes mu in {1, 3}; variances sigma^2/(mu (2 - h mu)).
    double h = 0.1;
    Eigen::MatrixXd cov = lmc_stationary_cov(s, h);
    double v1 = 2.0 / (1.0 * (2.0 - h));        // mode (1,1)/sqrt(2)
    double v3 = 2.0 / (3.0 * (2.0 - 3.0 * h));  // mode (1,-1)/sqrt(2)
    CHECK(cov(0, 0) == doctest::Approx(0.5 * (v1 + v3)).epsilon(1e-12));
    CHECK(cov(0, 1) == doctest::Approx(0.5 * (v1 - v3)).epsilon(1e-12));

    // Residual of the defining fixed point S = (I - hH) S (I - hH) + sigma^2 h I.
    Eigen::MatrixXd hm = precision_full(s);
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2) - h * hm;
    Eigen::MatrixXd resid =
        cov - (t * cov * t.transpose() + s.sigma * s.sigma * h * Eigen::MatrixXd::Identity(2, 2));
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);

    // Independent fixed-point iteration agrees.
    Eigen::MatrixXd iterated = oracles::lyapunov_fixed_point(
        t, s.sigma * s.sigma * h * Eigen::MatrixXd::Identity(2, 2));
    CHECK((iterated - cov).cwiseAbs().maxCoeff() < 1e-10);

    // Variance inflation is strictly monotone in h, per mode.
    double prev = 0;
    for (double step : {0.05, 0.1, 0.2, 0.4}) {
        double mode = 2.0 / (3.0 * (2.0 - 3.0 * step));
        CHECK(mode > prev);
        prev = mode;
    }

    CHECK_THROWS_AS(lmc_stationary_cov(s, 1.0), std::domain_error);  // h mu_max = 3 >= 2
    CHECK_THROWS_AS(lmc_stationary_cov(s, -0.1), std::domain_error);
}

TEST_CASE("spec validation") {
    GaussianSpec s = spec_1d();
    s.n_particles = 1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = spec_1d();
    s.k = 3;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = spec_1d();
    s.a = Eigen::MatrixXd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
