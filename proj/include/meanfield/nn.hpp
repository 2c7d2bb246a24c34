#pragma once

#include <Eigen/Dense>
#include <string>

#include "meanfield/model.hpp"
#include "meanfield/particle_state.hpp"

namespace meanfield {

// Supervised data for the two-layer network: n inputs in R^{d_in}, n scalar
// targets.
struct Dataset {
    Eigen::MatrixXd inputs;   // n x d_in
    Eigen::VectorXd targets;  // n

    int size() const { return static_cast<int>(inputs.rows()); }
    int input_dim() const { return static_cast<int>(inputs.cols()); }
};

// One neuron theta = (a, w). Packed as a particle of dimension 1 + d_in,
// output weight first.
struct NeuronParam {
    double a;
    Eigen::VectorXd w;

    static NeuronParam from_vector(const Eigen::VectorXd& theta) {
        return NeuronParam{theta(0), theta.tail(theta.size() - 1)};
    }
    Eigen::VectorXd to_vector() const {
        Eigen::VectorXd theta(1 + w.size());
        theta(0) = a;
        theta.tail(w.size()) = w;
        return theta;
    }
};

// One row per sample: d_in feature columns then the target. Whitespace or
// comma delimited; an optional non-numeric header line is skipped. Malformed
// rows are reported with their 1-based row index.
Dataset load_dataset(const std::string& path);

// f_rho(x) = (1/N) sum_j tanh(a_j) tanh(<w_j, x>). Always in [-1, 1].
double predict(const ParticleState& neurons, const Eigen::VectorXd& x);

// Squared loss over the dataset: sum_i (f_rho(x_i) - y_i)^2 / 2.
double nn_f0(const ParticleState& neurons, const Dataset& data);

// Intrinsic gradient of nn_f0 at theta:
//   sum_i (f_rho(x_i) - y_i) * grad_theta f_theta(x_i),
// grad_theta f_theta(x) = (sech^2(a) tanh(<w,x>), tanh(a) sech^2(<w,x>) x).
Eigen::VectorXd nn_w2_grad(const ParticleState& neurons, const Eigen::VectorXd& theta,
                           const Dataset& data);

// Conservative closed-form regularity bounds on a ball of the given data
// radius r >= max_i |x_i| (see nn_constants() in nn.cpp for the derivation):
//   B    = n * max_i(|y_i| + 1) * sqrt(1 + r^2)
//   beta = n * max( (max_i|y_i| + 1) * (1 + r)^2 , 1 + r^2 )
// Squared loss has unbounded derivatives on all of R, so the bounds are
// honest only for predictions in [-1,1] and data inside the radius; that is
// exactly the regime the tanh-tanh network lives in.
struct NnConstants {
    double b_bound;
    double beta_bound;
};
NnConstants nn_constants(const Dataset& data, double radius);

// GeneralModel over neuron particles of dimension 1 + d_in. Constants are
// filled from nn_constants with the data radius.
GeneralModel make_nn_model(const Dataset& data, double lambda, double sigma);

}  // namespace meanfield
