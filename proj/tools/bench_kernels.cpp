// Times the OpenMP kernels against their serial references and checks that
// the outputs are bit-identical. Usage: bench_kernels [n_particles ...]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <vector>

#include "meanfield/model.hpp"
#include "meanfield/nn.hpp"
#include "meanfield/parallel.hpp"
#include "meanfield/rng.hpp"

namespace mf = meanfield;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> sizes = {64, 256, 1024};
    if (argc > 1) {
        sizes.clear();
        for (int i = 1; i < argc; ++i) sizes.push_back(std::atoi(argv[i]));
    }
    const int d = 2;
    Eigen::MatrixXd a(d, d);
    a << 1.2, 0.3, 0.3, 0.8;
    mf::PairwiseModel model = mf::make_gaussian_pairwise(a, 0.5, std::sqrt(2.0));

    std::cout << "workers: " << mf::worker_count() << "\n";
    std::cout << "n_particles  serial_ms  parallel_ms  speedup  bit_equal\n";
    for (int n : sizes) {
        mf::Rng rng(42);
        Eigen::MatrixXd x(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
        mf::ParticleState state(x);

        Eigen::MatrixXd ref = mf::pairwise_drift_serial(model, x);
        Eigen::MatrixXd par = mf::pairwise_drift(model, state);
        bool equal = (ref.array() == par.array()).all();
        double lref = mf::pairwise_log_density_serial(model, x);
        double lpar = mf::pairwise_log_density(model, state);
        equal = equal && (lref == lpar);

        int reps = std::max(1, 200000 / (n * n / 64));
        double ts = time_ms([&] { mf::pairwise_drift_serial(model, x); }, reps);
        double tp = time_ms([&] { mf::pairwise_drift(model, state); }, reps);
        std::printf("%11d  %9.3f  %11.3f  %7.2fx  %s\n", n, ts, tp, ts / tp,
                    equal ? "yes" : "NO");
        if (!equal) return 1;
    }
    return 0;
}
