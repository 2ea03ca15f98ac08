// Benchmark of the OpenMP gradient-estimator kernel against the serial
// reference implementation, including a bit-identity check of the results.

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "sh2/benchmarks.hpp"
#include "sh2/estimator.hpp"
#include "sh2/sampling.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double time_seconds(const std::function<void()>& fn, int repeats) {
    const auto start = Clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    return std::chrono::duration<double>(Clock::now() - start).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    const int n_states = argc > 1 ? std::atoi(argv[1]) : 40;
    const int sample_count = argc > 2 ? std::atoi(argv[2]) : 2000;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    const sh2::RandomAffineBenchmark bench = sh2::random_affine_benchmark(n_states, 4, 1);
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(4, 0.1);
    const auto dist = sh2::log_uniform(1e-2, 1e3);
    const sh2::EstimatorOptions opts{0};

    sh2::GradientEstimate serial, parallel;
    const double t_serial = time_seconds(
        [&] {
            serial = sh2::estimate_gradient_serial(bench.ps, mu, *dist, sample_count, 42, opts);
        },
        repeats);
    const double t_parallel = time_seconds(
        [&] { parallel = sh2::estimate_gradient(bench.ps, mu, *dist, sample_count, 42, opts); },
        repeats);

    const bool identical = serial.estimate == parallel.estimate;
    std::cout << "states = " << n_states << ", M = " << sample_count
              << ", threads = " << omp_get_max_threads() << "\n";
    std::cout << "serial reference: " << t_serial * 1e3 << " ms\n";
    std::cout << "OpenMP kernel:    " << t_parallel * 1e3 << " ms (speedup "
              << t_serial / t_parallel << "x)\n";
    std::cout << "results bit-identical: " << (identical ? "yes" : "NO") << "\n";
    return identical ? 0 : 1;
}
