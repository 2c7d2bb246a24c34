#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace meanfield {

// An N x d configuration, one particle per row. The same object doubles as
// the empirical measure rho_{x^{1:N}} = (1/N) sum_i delta_{x^i}.
class ParticleState {
public:
    explicit ParticleState(Eigen::MatrixXd x) : x_(std::move(x)) {
        if (x_.rows() < 1 || x_.cols() < 1)
            throw std::invalid_argument("ParticleState: need at least one particle and one dimension");
        if (!x_.allFinite())
            throw std::invalid_argument("ParticleState: non-finite coordinate");
    }

    static ParticleState Zero(int n, int d) { return ParticleState(Eigen::MatrixXd::Zero(n, d)); }

    int n_particles() const { return static_cast<int>(x_.rows()); }
    int dim() const { return static_cast<int>(x_.cols()); }

    const Eigen::MatrixXd& matrix() const { return x_; }
    Eigen::VectorXd particle(int i) const { return x_.row(i).transpose(); }

private:
    Eigen::MatrixXd x_;
};

}  // namespace meanfield
