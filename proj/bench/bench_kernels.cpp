// Timing comparison of the OpenMP kernels against their serial references:
// the commutation transform, the transfer-matrix circuit evolution, and a
// sample-parallel experiment loop.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "mvb/experiments.hpp"
#include "mvb/pauli.hpp"
#include "mvb/rng.hpp"
#include "mvb/simulation.hpp"

using namespace mvb;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_best_ms(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double start = now_ms();
        body();
        best = std::min(best, now_ms() - start);
    }
    return best;
}

void bench_wht() {
    std::printf("commutation transform (unnormalized)\n");
    std::printf("%4s %12s %12s %8s\n", "n", "serial ms", "openmp ms", "speedup");
    auto rng = make_rng(1, 0);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 7; n <= 11; ++n) {
        PauliVector v(n);
        for (auto& x : v.values) {
            x = dist(rng);
        }
        double sink = 0;
        const double serial = time_best_ms(3, [&] { sink += wht_commutation_serial(v, false)[0]; });
        const double parallel = time_best_ms(3, [&] { sink += wht_commutation(v, false)[0]; });
        if (sink == 0.12345) {
            std::printf("-");
        }
        std::printf("%4d %12.3f %12.3f %8.2f\n", n, serial, parallel, serial / parallel);
    }
}

LayeredCircuit deep_circuit(int n, int depth, std::uint64_t seed) {
    auto rng = make_rng(seed, 0);
    LayeredCircuit c;
    c.n = n;
    PauliVector f = PauliVector::constant(n, 0.999);
    f.values[0] = 1.0;
    for (int l = 0; l < depth; ++l) {
        CircuitLayer layer;
        for (int q = 0; q < n; ++q) {
            layer.easy.push_back(haar_single_qubit_gate(q, rng));
        }
        layer.channel = PauliStochastishChannel::from_fidelities(f);
        for (int q = l % 2; q + 1 < n; q += 2) {
            layer.hard.push_back({q, q + 1});
        }
        c.layers.push_back(std::move(layer));
    }
    return c;
}

void bench_evolve() {
    std::printf("\ncircuit evolution, depth 20 brickwork\n");
    std::printf("%4s %12s %12s %8s\n", "n", "serial ms", "openmp ms", "speedup");
    for (int n = 7; n <= 10; ++n) {
        const LayeredCircuit c = deep_circuit(n, 20, 2);
        const PauliVector rho0 = zero_state_coeffs(n);
        double sink = 0;
        const double serial = time_best_ms(3, [&] { sink += evolve_serial(c, rho0)[0]; });
        const double parallel = time_best_ms(3, [&] { sink += evolve(c, rho0)[0]; });
        if (sink == 0.12345) {
            std::printf("-");
        }
        std::printf("%4d %12.3f %12.3f %8.2f\n", n, serial, parallel, serial / parallel);
    }
}

void bench_experiment() {
    std::printf("\nperturbation experiment, n=4 depth=10, 64 circuits x 2 sets\n");
    PerturbationConfig cfg;
    cfg.n = 4;
    cfg.depth = 10;
    cfg.num_circuits = 64;
    cfg.num_channel_sets = 2;
    cfg.seed = 5;
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double serial = time_best_ms(2, [&] { run_perturbation_experiment(cfg); });
    omp_set_num_threads(max_threads);
    const double parallel = time_best_ms(2, [&] { run_perturbation_experiment(cfg); });
    std::printf("%-10s %12.1f ms\n", "1 thread", serial);
    std::printf("%-2d threads %12.1f ms  speedup %.2f\n", max_threads, parallel,
                serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());
    bench_wht();
    bench_evolve();
    bench_experiment();
    return 0;
}
