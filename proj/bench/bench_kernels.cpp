#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fivec/simulator.hpp"

using namespace fivec;

namespace {

struct KernelData {
    std::vector<double> grad[3][2];
    std::vector<double> stress[3][2];
    StressKernelIO io;

    explicit KernelData(size_t n) {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g(0.0, 1e-3);
        io.count = n;
        io.constant = Moduli{1.0, 1.0, 0.5, 0.25, 0.1};
        for (int m = 0; m < 3; ++m) {
            for (int k = 0; k < 2; ++k) {
                grad[m][k].resize(n);
                stress[m][k].resize(n);
                for (auto& x : grad[m][k]) x = g(rng);
                io.grad[m][k] = grad[m][k].data();
                io.stress[m][k] = stress[m][k].data();
            }
        }
    }
};

void BM_StressSerial(benchmark::State& state) {
    KernelData d(static_cast<size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stress_kernel_serial(d.io, Nonlinearity::full));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_StressOpenMP(benchmark::State& state) {
    KernelData d(static_cast<size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stress_kernel_openmp(d.io, Nonlinearity::full));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolverStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n, 1.0};
    const ConstantMedium m(MaterialPoint(1.0, 1.0, 0.5, 0.25));
    SolverOptions opt;
    opt.backend = state.range(1) ? KernelBackend::openmp : KernelBackend::serial;
    SpectralSolver s(g, m, opt);
    PacketSource p;
    p.center = {n / 2.0, n / 2.0};
    p.sigma_par = p.sigma_perp = n / 10.0;
    Field3 u = make_field(g), v = make_field(g);
    packet_initial_state(p, g, m.material_at(Vec3::Zero()).moduli(), u, v, 1e-3);
    s.set_state(u, v);
    for (auto _ : state) s.step_nonlinear();
}

}  // namespace

BENCHMARK(BM_StressSerial)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_StressOpenMP)->Arg(1 << 16)->Arg(1 << 18);
BENCHMARK(BM_SolverStep)->Args({256, 0})->Args({256, 1});

BENCHMARK_MAIN();
