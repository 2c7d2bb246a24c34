#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "meanfield/model.hpp"
#include "meanfield/nn.hpp"
#include "meanfield/rng.hpp"

using namespace meanfield;

namespace {

Dataset toy_dataset() {
    Dataset d;
    d.inputs.resize(4, 2);
    d.inputs << 1, 1, 1, -1, -1, 1, -1, -1;
    d.targets.resize(4);
    d.targets << 0.8, -0.3, 0.3, -0.8;
    return d;
}

Eigen::MatrixXd random_neurons(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) x(i, j) = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("predict: zeros and bounds") {
    Dataset data = toy_dataset();
    // All a_j = 0: prediction 0 everywhere.
    Eigen::MatrixXd th = random_neurons(4, 3, 1);
    th.col(0).setZero();
    ParticleState neurons(th);
    for (int i = 0; i < data.size(); ++i)
        CHECK(predict(neurons, data.inputs.row(i).transpose()) == 0.0);

    // N=1, w = 0: tanh(a) * tanh(0) = 0.
    Eigen::MatrixXd one(1, 3);
    one << 1.3, 0.0, 0.0;
    Eigen::VectorXd x(2);
    x << 0.4, -0.2;
    CHECK(predict(ParticleState(one), x) == 0.0);

    // |predict| <= 1 always.
    Rng rng(3);
    Eigen::MatrixXd big = 10.0 * random_neurons(6, 3, 5);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd p(2);
        p << 5 * rng.normal(), 5 * rng.normal();
        CHECK(std::abs(predict(ParticleState(big), p)) <= 1.0);
    }
}

TEST_CASE("predict: N=2 direct formula cross-check") {
    Eigen::MatrixXd th(2, 3);
    th << 0.7, 0.2, -0.5, -1.1, 0.9, 0.3;
    Eigen::VectorXd x(2);
    x << 0.6, -1.2;
    double want = 0.5 * (std::tanh(0.7) * std::tanh(0.2 * 0.6 + (-0.5) * (-1.2)) +
                         std::tanh(-1.1) * std::tanh(0.9 * 0.6 + 0.3 * (-1.2)));
    CHECK(predict(ParticleState(th), x) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("predict is invariant under negating every neuron") {
    Dataset data = toy_dataset();
    Eigen::MatrixXd th = random_neurons(5, 3, 9);
    ParticleState a(th), b(Eigen::MatrixXd(-th));
    for (int i = 0; i < data.size(); ++i) {
        Eigen::VectorXd x = data.inputs.row(i).transpose();
        CHECK(predict(a, x) == doctest::Approx(predict(b, x)).epsilon(1e-15));
    }
}

TEST_CASE("nn_f0: perfect and zero networks") {
    Dataset data = toy_dataset();
    // Zero network: F0 = sum y_i^2 / 2.
    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 3);
    CHECK(nn_f0(ParticleState(zeros), data) ==
          doctest::Approx(0.5 * data.targets.squaredNorm()).epsilon(1e-15));

    // Perfect predictions: zero loss (targets equal to the model output).
    Eigen::MatrixXd th = random_neurons(3, 3, 2);
    ParticleState neurons(th);
    Dataset fit = data;
    for (int i = 0; i < fit.size(); ++i)
        fit.targets(i) = predict(neurons, fit.inputs.row(i).transpose());
    CHECK(nn_f0(neurons, fit) == doctest::Approx(0.0).epsilon(1e-15));

    // Random instance vs an independent summation.
    double direct = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        double f = predict(neurons, data.inputs.row(i).transpose());
        direct += 0.5 * (f - data.targets(i)) * (f - data.targets(i));
    }
    CHECK(nn_f0(neurons, data) == doctest::Approx(direct).epsilon(1e-14));

    // Boundedness: F0 <= n/2 (1 + max|y|)^2.
    double cap = data.size() * 0.5 * std::pow(1.0 + data.targets.cwiseAbs().maxCoeff(), 2);
    CHECK(nn_f0(neurons, data) <= cap);
}

TEST_CASE("nn_w2_grad: zero residuals and hand chain rule") {
    Dataset data = toy_dataset();
    Eigen::MatrixXd th = random_neurons(3, 3, 4);
    ParticleState neurons(th);
    Dataset fit = data;
    for (int i = 0; i < fit.size(); ++i)
        fit.targets(i) = predict(neurons, fit.inputs.row(i).transpose());
    CHECK(nn_w2_grad(neurons, th.row(0).transpose(), fit).norm() < 1e-14);

    // Single data point, N = 1: fully hand-computed chain rule.
    Dataset single;
    single.inputs.resize(1, 2);
    single.inputs << 0.5, -0.25;
    single.targets.resize(1);
    single.targets << 0.2;
    Eigen::MatrixXd one(1, 3);
    one << 0.9, 0.4, -0.7;
    ParticleState n1(one);
    double z = 0.4 * 0.5 + (-0.7) * (-0.25);
    double f = std::tanh(0.9) * std::tanh(z);
    double resid = f - 0.2;
    double sech2_a = 1.0 / std::pow(std::cosh(0.9), 2);
    double sech2_z = 1.0 / std::pow(std::cosh(z), 2);
    Eigen::VectorXd want(3);
    want << resid * sech2_a * std::tanh(z), resid * std::tanh(0.9) * sech2_z * 0.5,
        resid * std::tanh(0.9) * sech2_z * (-0.25);
    Eigen::VectorXd got = nn_w2_grad(n1, one.row(0).transpose(), single);
    CHECK((got - want).norm() < 1e-14);
}

TEST_CASE("gradient identity: block gradient of N F0 equals the intrinsic gradient") {
    Dataset data = toy_dataset();
    const int n = 5, dim = 3;
    Eigen::MatrixXd th = random_neurons(n, dim, 6);
    ParticleState neurons(th);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd intrinsic = nn_w2_grad(neurons, th.row(i).transpose(), data);
        auto f = [&](const Eigen::VectorXd& theta) {
            Eigen::MatrixXd s = th;
            s.row(i) = theta.transpose();
            return n * nn_f0(ParticleState(s), data);
        };
        Eigen::VectorXd fd = central_gradient(f, th.row(i).transpose());
        CHECK((intrinsic - fd).norm() / std::max(1.0, fd.norm()) < 1e-5);
    }
}

TEST_CASE("nn_constants: fixtures, scaling, and Monte Carlo domination") {
    // n = 1, x = 0, y = 0: B = 1.
    Dataset trivial;
    trivial.inputs = Eigen::MatrixXd::Zero(1, 2);
    trivial.targets = Eigen::VectorXd::Zero(1);
    CHECK(nn_constants(trivial, 0.0).b_bound == doctest::Approx(1.0));

    Dataset data = toy_dataset();
    double radius = 0;
    for (int i = 0; i < data.size(); ++i) radius = std::max(radius, data.inputs.row(i).norm());
    auto c = nn_constants(data, radius);

    // Doubling targets at most doubles the B bound.
    Dataset doubled = data;
    doubled.targets *= 2.0;
    CHECK(nn_constants(doubled, radius).b_bound <= 2.0 * c.b_bound);

    // The bound dominates sampled intrinsic-gradient norms.
    Rng rng(15);
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
        Eigen::MatrixXd th = 3.0 * random_neurons(3, 3, rng.next_u64());
        ParticleState neurons(th);
        int pick = static_cast<int>(rng.next_u64() % 3);
        worst = std::max(worst, nn_w2_grad(neurons, th.row(pick).transpose(), data).norm());
    }
    CHECK(worst <= c.b_bound);

    CHECK_THROWS_AS(nn_constants(data, 0.1), std::invalid_argument);
}

TEST_CASE("log-smoothness of the particle score holds with the declared beta") {
    Dataset data = toy_dataset();
    GeneralModel model = make_nn_model(data, 0.1, std::sqrt(2.0));
    const double bound = 4.0 * *model.beta / (model.sigma * model.sigma) +
                         2.0 * model.lambda / (model.sigma * model.sigma);
    Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        Eigen::MatrixXd a = random_neurons(4, 3, rng.next_u64());
        Eigen::MatrixXd b = random_neurons(4, 3, rng.next_u64());
        double num = (general_score(model, ParticleState(a)) -
                      general_score(model, ParticleState(b)))
                         .norm();
        double den = (a - b).norm();
        CHECK(num <= bound * den * (1.0 + 1e-9));
    }
}

TEST_CASE("dataset loader: headers, delimiters, malformed rows") {
    const char* path = "nn_loader_test.csv";
    {
        std::ofstream out(path);
        out << "x0,x1,y\n";
        out << "1.0, 1.0, 0.8\n";
        out << "1.0\t-1.0\t-0.3\n";
        out << "-1 1 0.3\n";
    }
    Dataset d = load_dataset(path);
    CHECK(d.size() == 3);
    CHECK(d.input_dim() == 2);
    CHECK(d.targets(0) == doctest::Approx(0.8));
    CHECK(d.inputs(2, 0) == doctest::Approx(-1.0));

    {
        std::ofstream out(path);
        out << "1.0 2.0 3.0\n";
        out << "1.0 oops 3.0\n";
    }
    try {
        load_dataset(path);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    std::remove(path);
}
