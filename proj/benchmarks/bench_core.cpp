#include <benchmark/benchmark.h>

#include "fdos/basis.hpp"
#include "fdos/model.hpp"
#include "fdos/simbench.hpp"
#include "fdos/tuning.hpp"

namespace {

void basis_eval_local(benchmark::State& state) {
    const fdos::BasisSystem basis({0.0, 1.0}, static_cast<int>(state.range(0)), 3);
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(basis.eval_local(t));
        t += 0.0137;
        if (t > 1.0) t -= 1.0;
    }
}
BENCHMARK(basis_eval_local)->Arg(20)->Arg(200);

void design_context(benchmark::State& state) {
    fdos::SimulationSpec spec;
    spec.n_train = static_cast<std::size_t>(state.range(0));
    spec.n_test = 1;
    const auto data = fdos::simulate_dataset(spec, 0);
    const fdos::BasisSystem basis({0.0, 1.0}, 20, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fdos::DesignContext::build(data.train, basis));
    }
}
BENCHMARK(design_context)->Arg(200)->Unit(benchmark::kMillisecond);

void admm_fit(benchmark::State& state) {
    fdos::SimulationSpec spec;
    spec.n_test = 1;
    const auto data = fdos::simulate_dataset(spec, 0);
    const auto ctx = fdos::DesignContext::build(data.train, fdos::BasisSystem({0.0, 1.0}, 20, 3));
    fdos::FitOptions o;
    o.mode = state.range(0) == 0 ? fdos::Mode::fdos : fdos::Mode::faddos;
    o.varphi = 7e-6;
    o.solver.lambda1 = 1.0;
    o.solver.lambda2 = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fdos::fit(ctx, o));
    }
}
BENCHMARK(admm_fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void cross_validation_small_grid(benchmark::State& state) {
    fdos::SimulationSpec spec;
    spec.n_test = 1;
    const auto data = fdos::simulate_dataset(spec, 0);
    const auto ctx = fdos::DesignContext::build(data.train, fdos::BasisSystem({0.0, 1.0}, 20, 3));
    fdos::TuningGrid g;
    g.lambda1_values = fdos::log_space(0.1, 10.0, 3);
    g.lambda2_values = fdos::log_space(0.1, 10.0, 3);
    g.varphi_values = {7e-6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fdos::cross_validate(ctx, g, fdos::FitOptions{}));
    }
}
BENCHMARK(cross_validation_small_grid)->Unit(benchmark::kMillisecond)->Iterations(1);

} // namespace
BENCHMARK_MAIN();
