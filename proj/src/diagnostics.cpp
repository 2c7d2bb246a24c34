#include "meanfield/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "meanfield/rng.hpp"

namespace meanfield {

MomentSummary empirical_moments(const std::vector<Eigen::VectorXd>& samples, int n_batches) {
    if (n_batches < 8) throw std::invalid_argument("empirical_moments: n_batches >= 8 required");
    const int n = static_cast<int>(samples.size());
    if (n < n_batches) throw std::invalid_argument("empirical_moments: too few samples");
    const int dim = static_cast<int>(samples.front().size());

    MomentSummary out;
    out.n_samples = n;
    out.n_batches = n_batches;
    out.mean = Eigen::VectorXd::Zero(dim);
    for (const auto& s : samples) out.mean += s;
    out.mean /= n;

    out.cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& s : samples) {
        Eigen::VectorXd c = s - out.mean;
        out.cov += c * c.transpose();
    }
    out.cov /= std::max(1, n - 1);

    const int len = n / n_batches;
    Eigen::MatrixXd batch_means(n_batches, dim);
    for (int b = 0; b < n_batches; ++b) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
        for (int i = b * len; i < (b + 1) * len; ++i) m += samples[i];
        batch_means.row(b) = (m / len).transpose();
    }
    Eigen::VectorXd bm = batch_means.colwise().mean();
    out.se_mean = Eigen::VectorXd::Zero(dim);
    for (int b = 0; b < n_batches; ++b) {
        Eigen::VectorXd c = batch_means.row(b).transpose() - bm;
        out.se_mean += c.cwiseProduct(c);
    }
    out.se_mean = (out.se_mean / (n_batches - 1) / n_batches).cwiseSqrt();
    return out;
}

double empirical_w2sq(const std::vector<Eigen::VectorXd>& a,
                      const std::vector<Eigen::VectorXd>& b) {
    const int m = static_cast<int>(a.size());
    if (m == 0 || b.size() != a.size())
        throw std::invalid_argument("empirical_w2sq: clouds must be non-empty and equal sized");
    if (m > 2048)
        throw std::invalid_argument("empirical_w2sq: cloud size above 2048; subsample first");
    for (int i = 0; i < m; ++i)
        if (a[i].size() != a[0].size() || b[i].size() != a[0].size())
            throw std::invalid_argument("empirical_w2sq: dimension mismatch");

    Eigen::MatrixXd cost(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) cost(i, j) = (a[i] - b[j]).squaredNorm();

    // Shortest-augmenting-path assignment with potentials (1-based arrays).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> match(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= m; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = match[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= m; ++j)
        if (match[j]) total += cost(match[j] - 1, j - 1);
    return total / m;
}

std::vector<Eigen::VectorXd> extract_marginal(const std::vector<Eigen::MatrixXd>& states, int k,
                                              bool relabel, std::uint64_t seed) {
    if (states.empty()) throw std::invalid_argument("extract_marginal: no states");
    const int n = static_cast<int>(states.front().rows());
    const int d = static_cast<int>(states.front().cols());
    if (k < 1 || k > n) throw std::invalid_argument("extract_marginal: k in [1, N] required");

    Rng rng(seed);
    std::vector<int> labels(n);
    std::vector<Eigen::VectorXd> out;
    out.reserve(states.size());
    for (const auto& s : states) {
        if (s.rows() != n || s.cols() != d)
            throw std::invalid_argument("extract_marginal: inconsistent state shapes");
        for (int i = 0; i < n; ++i) labels[i] = i;
        if (relabel) {
            for (int i = n - 1; i > 0; --i) {  // Fisher-Yates
                int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
                std::swap(labels[i], labels[j]);
            }
        }
        Eigen::VectorXd row(k * d);
        for (int i = 0; i < k; ++i) row.segment(i * d, d) = s.row(labels[i]).transpose();
        out.push_back(std::move(row));
    }
    return out;
}

ScalingFit scaling_exponent(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    if (n < 3 || ys.size() != xs.size())
        throw std::invalid_argument("scaling_exponent: need >= 3 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        if (xs[i] <= 0 || ys[i] <= 0)
            throw std::invalid_argument("scaling_exponent: inputs must be positive");
        double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
    }
    double vxx = sxx - sx * sx / n;
    double vxy = sxy - sx * sy / n;
    double vyy = syy - sy * sy / n;
    if (vxx <= 0) throw std::invalid_argument("scaling_exponent: degenerate x values");
    ScalingFit fit;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r_squared = (vyy > 0) ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return fit;
}

BoundReport bound_report(double measured, double bound) {
    if (bound <= 0) throw std::invalid_argument("bound_report: bound must be positive");
    BoundReport r;
    r.ratio = measured / bound;
    r.satisfied = r.ratio <= 1.0;
    return r;
}

}  // namespace meanfield
