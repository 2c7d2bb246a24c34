#include <doctest.h>

#include <cmath>

#include "meanfield/diagnostics.hpp"
#include "meanfield/rng.hpp"
#include "oracles.hpp"

using namespace meanfield;

namespace {

std::vector<Eigen::VectorXd> gaussian_cloud(int n, int d, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) v(j) = scale * rng.normal();
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("empirical moments: constants, CLT, batch scaling") {
    std::vector<Eigen::VectorXd> constant(64, Eigen::VectorXd::Constant(2, 3.5));
    auto m = empirical_moments(constant, 8);
    CHECK(m.mean(0) == doctest::Approx(3.5));
    CHECK(m.cov.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(m.se_mean.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    auto cloud = gaussian_cloud(100000, 2, 3);
    auto g = empirical_moments(cloud, 32);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(g.mean(j)) <= 4.0 * g.se_mean(j));
        CHECK(g.cov(j, j) == doctest::Approx(1.0).epsilon(0.05));
    }

    // Doubling the batch count moves the standard error by a bounded factor.
    auto g2 = empirical_moments(cloud, 64);
    for (int j = 0; j < 2; ++j) {
        double ratio = g2.se_mean(j) / g.se_mean(j);
        CHECK(ratio > 0.5);
        CHECK(ratio < 2.0);
    }

    CHECK_THROWS_AS(empirical_moments(constant, 4), std::invalid_argument);
    CHECK_THROWS_AS(empirical_moments({Eigen::VectorXd::Zero(1)}, 8), std::invalid_argument);
}

TEST_CASE("empirical w2: identity, 1-d sorting, brute force, metric axioms") {
    auto a = gaussian_cloud(32, 2, 5);
    CHECK(empirical_w2sq(a, a) == doctest::Approx(0.0));

    // 1-d optimal pairing is the sorted pairing.
    auto x = gaussian_cloud(64, 1, 7);
    auto y = gaussian_cloud(64, 1, 8, 1.3);
    std::vector<double> xs, ys;
    for (auto& v : x) xs.push_back(v(0));
    for (auto& v : y) ys.push_back(v(0));
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double sorted_value = 0;
    for (size_t i = 0; i < xs.size(); ++i) sorted_value += (xs[i] - ys[i]) * (xs[i] - ys[i]);
    sorted_value /= xs.size();
    CHECK(empirical_w2sq(x, y) == doctest::Approx(sorted_value).epsilon(1e-12));

    // m = 6 in 2-d: exhaustive over all 720 permutations.
    auto p = gaussian_cloud(6, 2, 11);
    auto q = gaussian_cloud(6, 2, 12);
    CHECK(empirical_w2sq(p, q) == doctest::Approx(oracles::brute_force_w2sq(p, q)).epsilon(1e-12));

    // Symmetry; zero iff equal as multisets (integer grids).
    CHECK(empirical_w2sq(p, q) == doctest::Approx(empirical_w2sq(q, p)).epsilon(1e-12));
    std::vector<Eigen::VectorXd> ints, perm;
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd v(2);
        v << i, -i;
        ints.push_back(v);
    }
    perm = {ints[3], ints[0], ints[4], ints[2], ints[1]};
    CHECK(empirical_w2sq(ints, perm) == doctest::Approx(0.0));
    perm[0](0) += 1.0;
    CHECK(empirical_w2sq(ints, perm) > 0.0);

    CHECK_THROWS_AS(empirical_w2sq(p, gaussian_cloud(5, 2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(empirical_w2sq(gaussian_cloud(3000, 1, 1), gaussian_cloud(3000, 1, 2)),
                    std::invalid_argument);
}

TEST_CASE("extract marginal: identity reshape, relabeling invariance") {
    Rng rng(9);
    std::vector<Eigen::MatrixXd> states;
    for (int t = 0; t < 4000; ++t) {
        Eigen::MatrixXd s(4, 2);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 2; ++j) s(i, j) = rng.normal() + (j == 0 ? 0.5 : -0.5);
        states.push_back(s);
    }

    auto full = extract_marginal(states, 4);
    CHECK(full.front().size() == 8);
    CHECK(full.front()(3) == states.front()(1, 1));

    CHECK_THROWS_AS(extract_marginal(states, 5), std::invalid_argument);

    // Relabeled and plain marginals agree in expectation (3-se test).
    auto plain = extract_marginal(states, 1);
    auto relabeled = extract_marginal(states, 1, true, 123);
    auto mp = empirical_moments(plain, 16);
    auto mr = empirical_moments(relabeled, 16);
    for (int j = 0; j < 2; ++j) {
        double se = std::sqrt(mp.se_mean(j) * mp.se_mean(j) + mr.se_mean(j) * mr.se_mean(j));
        CHECK(std::abs(mp.mean(j) - mr.mean(j)) <= 3.0 * se);
    }
}

TEST_CASE("scaling exponent: exact power laws") {
    std::vector<double> xs = {1, 2, 4, 8, 16};
    std::vector<double> quad, inv2;
    for (double x : xs) {
        quad.push_back(x * x);
        inv2.push_back(5.0 / (x * x));
    }
    auto up = scaling_exponent(xs, quad);
    CHECK(up.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(up.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    auto dn = scaling_exponent(xs, inv2);
    CHECK(dn.slope == doctest::Approx(-2.0).epsilon(1e-12));

    CHECK_THROWS_AS(scaling_exponent({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(scaling_exponent({1.0, -2.0, 3.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("bound report") {
    CHECK(bound_report(0.0, 1.0).ratio == 0.0);
    CHECK(bound_report(0.0, 1.0).satisfied);
    CHECK(bound_report(1.0, 1.0).ratio == doctest::Approx(1.0));
    CHECK(bound_report(1.0, 1.0).satisfied);
    CHECK(bound_report(2.0, 1.0).ratio == doctest::Approx(2.0));
    CHECK_FALSE(bound_report(2.0, 1.0).satisfied);
    CHECK_THROWS_AS(bound_report(1.0, 0.0), std::invalid_argument);
}
