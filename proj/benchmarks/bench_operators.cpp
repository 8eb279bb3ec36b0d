#include <benchmark/benchmark.h>

#include <random>

#include "stochdp/bellman.hpp"
#include "stochdp/growth_model.hpp"
#include "toys.hpp"

using namespace stochdp;

namespace {

ValueFunction random_values(const BellmanOperator& T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ValueFunction f = T.zero();
    for (double& v : f.values()) v = u(rng);
    return f;
}

void apply_bellman_growth(benchmark::State& state) {
    const auto model = build_growth(toys::growth_params(),
                                    toys::growth_setup(ActionMode::grid, static_cast<std::size_t>(state.range(0))));
    const auto f = random_values(*model.op, 1);
    for (auto _ : state) benchmark::DoNotOptimize(model.op->apply(f));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.values().size()));
}
BENCHMARK(apply_bellman_growth)->Arg(25)->Arg(50)->Arg(100);

void apply_bellman_continuous(benchmark::State& state) {
    const auto model = build_growth(toys::growth_params(), toys::growth_setup(ActionMode::continuous, 50));
    const auto f = random_values(*model.op, 2);
    for (auto _ : state) benchmark::DoNotOptimize(model.op->apply(f));
}
BENCHMARK(apply_bellman_continuous);

void family_seminorms(benchmark::State& state) {
    const auto model = build_growth(toys::growth_params(), toys::growth_setup(ActionMode::grid, 50));
    const auto f = random_values(*model.op, 3);
    for (auto _ : state) benchmark::DoNotOptimize(model.op->family_seminorms(f, model.monitored));
}
BENCHMARK(family_seminorms);

void cop_apply_growth(benchmark::State& state) {
    const auto model = build_growth(toys::growth_params(), toys::growth_setup(ActionMode::grid, 50));
    const auto& T = *model.op;
    const SeminormTable p(T.family_rows(model.monitored.size()), T.nz(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(T.cop_apply(p, model.monitored));
}
BENCHMARK(cop_apply_growth);

void cube_apply(benchmark::State& state) {
    const auto T = toys::cube_operator(static_cast<unsigned>(state.range(0)));
    const auto f = random_values(*T, 4);
    for (auto _ : state) benchmark::DoNotOptimize(T->apply(f));
}
BENCHMARK(cube_apply)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
