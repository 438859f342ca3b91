#include "graspkb/exact.hpp"
#include "graspkb/grounding.hpp"
#include "graspkb/learner.hpp"
#include "graspkb/parser.hpp"
#include "graspkb/random.hpp"
#include "graspkb/sampler.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <string>
#include <vector>

namespace {

using namespace graspkb;

std::string const schema_text = R"(domain object = {}
domain shape = {cubic, cylindrical, irregular, spherical}
domain category = {container, electronics, tool, toy, kitchenware, stationery, food, clothing}
domain affordance = {pour, stack, handover, cut, write, wear, eat, play, call, brush, hammer, hang, contain, sit}
domain region = {1, 2, 3}
predicate hasShape(object, shape)
predicate hasCategory(object, category)
predicate hasAffordance(object, affordance)
predicate graspRegion(object, region)
)";

std::string const rules_text = R"(hasAffordance(o, +a)
graspRegion(o, +r)
hasCategory(o, +c) => hasAffordance(o, +a)
hasShape(o, +s) => hasAffordance(o, +a)
hasAffordance(o, +a) => graspRegion(o, +r)
)";

struct Problem {
    Schema schema;
    std::vector<Formula> formulas;
    std::vector<double> weights;
};

Problem make_problem()
{
    Problem p;
    p.schema = parse_schema(schema_text);
    for (auto const& r : parse_rules(rules_text, p.schema)) {
        p.formulas.push_back(r.formula);
    }
    Rng rng(1);
    p.weights.resize(p.formulas.size());
    for (auto& w : p.weights) {
        w = rng.uniform(-1.0, 1.0);
    }
    return p;
}

std::vector<std::string> objects(std::size_t n)
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("o" + std::to_string(i));
    }
    return names;
}

void BM_GibbsSweeps(benchmark::State& state)
{
    auto const p = make_problem();
    GroundingTable const table(Universe::with_constants(p.schema, "object", objects(state.range(0))), p.formulas);
    std::vector<AtomId> free(table.atom_count());
    std::iota(free.begin(), free.end(), AtomId{0});
    Assignment const evidence(table.atom_count(), 0);
    SamplerConfig config;
    config.chains = 1;
    config.burn_in = 0;
    config.samples = 1000;
    for (auto _ : state) {
        auto est = gibbs_marginals(table, p.weights, evidence, free, {}, config);
        benchmark::DoNotOptimize(est.marginals.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.samples * free.size()));
    state.counters["atoms"] = static_cast<double>(free.size());
}
BENCHMARK(BM_GibbsSweeps)->Arg(1)->Arg(4)->Arg(16)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_PllGradient(benchmark::State& state)
{
    auto const p = make_problem();
    GroundingTable const table(Universe::with_constants(p.schema, "object", {"x"}), p.formulas);
    Rng rng(2);
    std::vector<Assignment> worlds;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        Assignment x(table.atom_count());
        for (auto& v : x) {
            v = rng.bernoulli(0.2);
        }
        worlds.push_back(std::move(x));
    }
    PseudoLikelihood const pll(table, worlds, 10.0);
    std::vector<double> grad(p.weights.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(pll.value_and_gradient(p.weights, grad));
    }
    state.counters["terms"] = static_cast<double>(pll.term_count());
}
BENCHMARK(BM_PllGradient)->Arg(100)->Arg(1000)->Arg(3280)->Unit(benchmark::kMicrosecond);

void BM_ExactEnumeration(benchmark::State& state)
{
    auto const p = make_problem();
    GroundingTable const table(Universe::with_constants(p.schema, "object", {"x"}), p.formulas);
    std::vector<AtomId> free;
    auto const& u = table.universe();
    auto const first = u.predicate_offset(*p.schema.find_predicate("hasAffordance"));
    for (std::int64_t k = 0; k < state.range(0); ++k) {
        free.push_back(static_cast<AtomId>(first + k));
    }
    Assignment const clamped(table.atom_count(), 0);
    for (auto _ : state) {
        auto r = enumerate(table, p.weights, free, clamped);
        benchmark::DoNotOptimize(r.log_z);
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_ExactEnumeration)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace
