#include "meanfield/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "meanfield/parallel.hpp"

namespace meanfield {

namespace {

double sech2(double t) {
    double c = std::cosh(t);
    return 1.0 / (c * c);
}

void require_neuron_dim(const ParticleState& neurons, const Dataset& data) {
    if (neurons.dim() != 1 + data.input_dim())
        throw std::invalid_argument("nn: neuron dimension must be 1 + d_in (got " +
                                    std::to_string(neurons.dim()) + ", need " +
                                    std::to_string(1 + data.input_dim()) + ")");
}

// Predictions for every data point; parallel over data points, each one a
// fixed-order sum over neurons.
Eigen::VectorXd predict_all(const ParticleState& neurons, const Dataset& data) {
    const Eigen::MatrixXd& th = neurons.matrix();
    const int n = data.size();
    const int nn = neurons.n_particles();
    Eigen::VectorXd out(n);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x = data.inputs.row(i).transpose();
        double s = 0.0;
        for (int j = 0; j < nn; ++j) {
            double a = th(j, 0);
            double z = th.row(j).tail(th.cols() - 1).dot(x.transpose());
            s += std::tanh(a) * std::tanh(z);
        }
        out(i) = s / nn;
    }
    return out;
}

Eigen::VectorXd grad_f_theta(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
    double a = theta(0);
    double z = theta.tail(theta.size() - 1).dot(x);
    Eigen::VectorXd g(theta.size());
    g(0) = sech2(a) * std::tanh(z);
    g.tail(x.size()) = std::tanh(a) * sech2(z) * x;
    return g;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',' || c == '\t' || c == ';') c = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        bool numeric = true;
        while (ss >> tok) {
            try {
                size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size()) { numeric = false; break; }
                row.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (row.empty() && numeric) continue;  // blank line
        if (!numeric) {
            if (lineno == 1) continue;  // header
            throw std::runtime_error("load_dataset: malformed row " + std::to_string(lineno) +
                                     " in " + path);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("load_dataset: row " + std::to_string(lineno) +
                                     " has " + std::to_string(row.size()) + " columns, expected " +
                                     std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_dataset: no samples in " + path);
    if (rows.front().size() < 2)
        throw std::runtime_error("load_dataset: need at least one feature column and a target");

    const int n = static_cast<int>(rows.size());
    const int d_in = static_cast<int>(rows.front().size()) - 1;
    Dataset data;
    data.inputs.resize(n, d_in);
    data.targets.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d_in; ++j) data.inputs(i, j) = rows[i][j];
        data.targets(i) = rows[i][d_in];
    }
    if (!data.inputs.allFinite() || !data.targets.allFinite())
        throw std::runtime_error("load_dataset: non-finite entry in " + path);
    return data;
}

double predict(const ParticleState& neurons, const Eigen::VectorXd& x) {
    if (neurons.dim() != 1 + x.size())
        throw std::invalid_argument("predict: neuron dimension must be 1 + d_in");
    const Eigen::MatrixXd& th = neurons.matrix();
    double s = 0.0;
    for (int j = 0; j < neurons.n_particles(); ++j) {
        double a = th(j, 0);
        double z = th.row(j).tail(th.cols() - 1).dot(x.transpose());
        s += std::tanh(a) * std::tanh(z);
    }
    return s / neurons.n_particles();
}

double nn_f0(const ParticleState& neurons, const Dataset& data) {
    require_neuron_dim(neurons, data);
    Eigen::VectorXd f = predict_all(neurons, data);
    return 0.5 * (f - data.targets).squaredNorm();
}

Eigen::VectorXd nn_w2_grad(const ParticleState& neurons, const Eigen::VectorXd& theta,
                           const Dataset& data) {
    require_neuron_dim(neurons, data);
    if (theta.size() != neurons.dim())
        throw std::invalid_argument("nn_w2_grad: theta dimension mismatch");
    Eigen::VectorXd residual = predict_all(neurons, data) - data.targets;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
    for (int i = 0; i < data.size(); ++i)
        g += residual(i) * grad_f_theta(theta, data.inputs.row(i).transpose());
    return g;
}

NnConstants nn_constants(const Dataset& data, double radius) {
    for (int i = 0; i < data.size(); ++i)
        if (data.inputs.row(i).norm() > radius * (1.0 + 1e-12))
            throw std::invalid_argument("nn_constants: radius does not bound data norms");
    double ymax = data.targets.size() ? data.targets.cwiseAbs().maxCoeff() : 0.0;
    const int n = data.size();
    // |f_theta| <= 1, so |f_rho - y| <= |y| + 1 and with
    // G = sup |grad_theta f| <= sqrt(1 + |x|^2) we get B <= n (|y|+1) G.
    double b = n * (ymax + 1.0) * std::sqrt(1.0 + radius * radius);
    // Two ingredients for the intrinsic smoothness:
    //  - theta-Lipschitzness of grad F0: |d1 loss| <= ymax+1 times the Hessian
    //    bound of f_theta. With |tanh| <= 1, sech^2 <= 1 and
    //    |2 sech^2 tanh| <= 1, the entries give |H| <= 1 + 2|x| + |x|^2.
    //  - measure-Lipschitzness: moving the measure by W1 moves f_rho(x_i) by
    //    at most G, the residual by the same, so the gradient by G^2.
    double h_bound = (1.0 + radius) * (1.0 + radius);
    double g_sq = 1.0 + radius * radius;
    double beta = n * std::max((ymax + 1.0) * h_bound, g_sq);
    return NnConstants{b, beta};
}

GeneralModel make_nn_model(const Dataset& data, double lambda, double sigma) {
    if (lambda < 0) throw std::invalid_argument("make_nn_model: lambda >= 0 required");
    if (sigma <= 0) throw std::invalid_argument("make_nn_model: sigma > 0 required");
    double radius = 0.0;
    for (int i = 0; i < data.size(); ++i)
        radius = std::max(radius, data.inputs.row(i).norm());
    NnConstants c = nn_constants(data, radius);

    GeneralModel m;
    m.name = "nn";
    m.lambda = lambda;
    m.sigma = sigma;
    m.beta = c.beta_bound;
    m.b_bound = c.b_bound;
    m.f0 = [data](const ParticleState& neurons) { return nn_f0(neurons, data); };
    m.w2_grad = [data](const ParticleState& neurons, const Eigen::VectorXd& theta) {
        return nn_w2_grad(neurons, theta, data);
    };
    // Batched version: share the prediction pass across all neurons.
    m.w2_grad_all = [data](const ParticleState& neurons) {
        require_neuron_dim(neurons, data);
        Eigen::VectorXd residual = predict_all(neurons, data) - data.targets;
        const int nn = neurons.n_particles();
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nn, neurons.dim());
#pragma omp parallel for schedule(static) num_threads(worker_count())
        for (int j = 0; j < nn; ++j) {
            Eigen::VectorXd theta = neurons.particle(j);
            Eigen::VectorXd gj = Eigen::VectorXd::Zero(theta.size());
            for (int i = 0; i < data.size(); ++i)
                gj += residual(i) * grad_f_theta(theta, data.inputs.row(i).transpose());
            g.row(j) = gj.transpose();
        }
        return g;
    };
    return m;
}

}  // namespace meanfield
