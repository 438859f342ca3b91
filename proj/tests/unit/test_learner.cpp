#include "fixtures.hpp"
#include "oracles.hpp"

#include "graspkb/error.hpp"
#include "graspkb/exact.hpp"
#include "graspkb/lbfgs.hpp"
#include "graspkb/learner.hpp"
#include "graspkb/model_io.hpp"
#include "graspkb/parser.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

using namespace graspkb;

namespace {

constexpr double no_prior = std::numeric_limits<double>::infinity();

std::vector<Assignment> exact_worlds(GroundingTable const& table, std::span<double const> w, std::size_t n,
                                     std::uint64_t seed)
{
    std::vector<AtomId> free(table.atom_count());
    std::iota(free.begin(), free.end(), AtomId{0});
    Assignment const zero(table.atom_count(), 0);
    Rng rng(seed);
    std::vector<Assignment> out;
    for (auto s : sample_exact(table, w, free, zero, n, rng)) {
        Assignment x = zero;
        apply_state(free, s, x);
        out.push_back(x);
    }
    return out;
}

} // namespace

TEST_SUITE("lbfgs")
{
    TEST_CASE("Rosenbrock")
    {
        Objective const f = [](std::span<double const> x, std::span<double> g) {
            double const a = 1.0 - x[0];
            double const b = x[1] - x[0] * x[0];
            g[0] = -2.0 * a - 400.0 * x[0] * b;
            g[1] = 200.0 * b;
            return a * a + 100.0 * b * b;
        };
        LbfgsOptions options;
        options.max_iterations = 500;
        options.gradient_tolerance = 1e-8;
        auto const r = minimize_lbfgs(f, {-1.2, 1.0}, options);
        CHECK(r.converged);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            CHECK(r.trace[i] <= r.trace[i - 1]);
        }
    }

    TEST_CASE("empty problem")
    {
        Objective const f = [](std::span<double const>, std::span<double>) { return 0.0; };
        auto const r = minimize_lbfgs(f, {}, {});
        CHECK(r.converged);
        CHECK(r.x.empty());
    }
}

TEST_SUITE("learner")
{
    TEST_CASE("config validation")
    {
        TrainingConfig c;
        CHECK_NOTHROW(c.validate());
        c.gradient_tolerance = 1.5;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = {};
        c.prior_sigma = -1.0;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = {};
        c.prior_sigma = no_prior;
        CHECK_NOTHROW(c.validate());
    }

    TEST_CASE("PLL at zero weights is N log 1/2")
    {
        Rng rng(1);
        auto const kb = oracle::random_kb(rng, 4, 1.0);
        auto const u = oracle::random_universe(kb, 2);
        GroundingTable const table(u, kb.formulas);
        std::vector<Assignment> const worlds{oracle::random_world(rng, u.atom_count())};
        std::vector<double> const zero(kb.formulas.size(), 0.0);
        CHECK(pseudo_log_likelihood(zero, table, worlds, 10.0) ==
              doctest::Approx(static_cast<double>(u.atom_count()) * std::log(0.5)).epsilon(1e-14));
    }

    TEST_CASE("one atom, one unconditional formula")
    {
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        GroundingTable const table(Universe::with_constants(schema, "object", {"a"}),
                                   {parse_formula("h(o)", schema)});
        std::vector<Assignment> const worlds{{1}};
        for (double w : {-2.0, 0.0, 0.7, 3.0}) {
            double const ws[] = {w};
            double const expected = -std::log1p(std::exp(-w)) - w * w / 200.0;
            CHECK(pseudo_log_likelihood(ws, table, worlds, 10.0) == doctest::Approx(expected).epsilon(1e-14));
        }
    }

    TEST_CASE("PLL matches the naive two-pass conditional")
    {
        Rng rng(2);
        for (int trial = 0; trial < 20; ++trial) {
            auto const kb = oracle::random_kb(rng, 3, 3.0);
            auto const u = oracle::random_universe(kb, 1);
            GroundingTable const table(u, kb.formulas);
            std::vector<Assignment> worlds;
            for (int i = 0; i < 4; ++i) {
                worlds.push_back(oracle::random_world(rng, u.atom_count()));
            }
            for (double sigma : {10.0, no_prior}) {
                CHECK(pseudo_log_likelihood(kb.weights, table, worlds, sigma) ==
                      doctest::Approx(oracle::pseudo_log_likelihood(u, kb.formulas, kb.weights, worlds, sigma))
                          .epsilon(1e-12));
            }
        }
    }

    TEST_CASE("gradient agrees with central differences")
    {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            auto const kb = oracle::random_kb(rng, 5, 3.0);
            auto const u = oracle::random_universe(kb, 1 + rng.below(2));
            GroundingTable const table(u, kb.formulas);
            std::vector<Assignment> const worlds{oracle::random_world(rng, u.atom_count()),
                                                 oracle::random_world(rng, u.atom_count())};
            auto const g = pll_gradient(kb.weights, table, worlds, 10.0);
            double const h = 1e-5;
            for (std::size_t i = 0; i < kb.weights.size(); ++i) {
                auto plus = kb.weights;
                auto minus = kb.weights;
                plus[i] += h;
                minus[i] -= h;
                double const fd = (pseudo_log_likelihood(plus, table, worlds, 10.0) -
                                   pseudo_log_likelihood(minus, table, worlds, 10.0)) /
                                  (2.0 * h);
                if (std::abs(g[i]) < 1e-8) {
                    CHECK(std::abs(fd) < 1e-6);
                } else {
                    CHECK(std::abs(fd - g[i]) / std::abs(g[i]) < 1e-5);
                }
            }
        }
    }

    TEST_CASE("symmetric data gives a zero gradient at w = 0")
    {
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        GroundingTable const table(Universe::with_constants(schema, "object", {"a"}),
                                   {parse_formula("h(o)", schema)});
        std::vector<Assignment> const worlds{{1}, {0}};
        double const w[] = {0.0};
        CHECK(pll_gradient(w, table, worlds, 10.0)[0] == 0.0);
    }

    TEST_CASE("prior-only component")
    {
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        // a tautology never changes with any atom
        GroundingTable const table(Universe::with_constants(schema, "object", {"a"}),
                                   {parse_formula("h(o) => h(o)", schema)});
        std::vector<Assignment> const worlds{{1}, {0}};
        double const w[] = {3.0};
        CHECK(pll_gradient(w, table, worlds, 10.0)[0] == doctest::Approx(-0.03).epsilon(1e-15));
    }

    TEST_CASE("zero formulas")
    {
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        GroundingTable const table(Universe::with_constants(schema, "object", {"a"}), {});
        std::vector<Assignment> const worlds{{1}};
        auto const m = fit(table, worlds, {});
        CHECK(m.model.weights.empty());
        CHECK(m.diagnostics.converged);
    }

    TEST_CASE("no worlds")
    {
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        GroundingTable const table(Universe::with_constants(schema, "object", {"a"}),
                                   {parse_formula("h(o)", schema)});
        CHECK_THROWS_AS((void)fit(table, std::vector<Assignment>{}, {}), ValidationError);
    }

    TEST_CASE("refit from exact samples recovers the marginals")
    {
        auto const schema = parse_schema("domain object = {}\npredicate p(object)\npredicate q(object)\n");
        std::vector<Formula> const fs{parse_formula("p(o)", schema), parse_formula("p(o) => q(o)", schema)};
        auto const u = Universe::with_constants(schema, "object", {"a"});
        GroundingTable const table(u, fs);
        std::vector<double> const truth{0.8, 1.5};
        auto const worlds = exact_worlds(table, truth, 500, 9);

        auto const learned = fit(table, worlds, {});
        std::vector<AtomId> const free{0, 1};
        Assignment const zero(2, 0);
        auto const a = enumerate(table, truth, free, zero);
        auto const b = enumerate(table, learned.model.weights, free, zero);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(a.marginals[j] - b.marginals[j]) < 0.05);
        }
        CHECK(learned.diagnostics.converged);
        CHECK(learned.diagnostics.gradient_norm <= 1e-5);
    }

    TEST_CASE("accepted steps never lower the PLL and runs are deterministic")
    {
        Rng rng(4);
        auto const kb = oracle::random_kb(rng, 6, 1.5);
        auto const u = oracle::random_universe(kb, 2);
        GroundingTable const table(u, kb.formulas);
        auto const worlds = exact_worlds(table, kb.weights, 200, 4);
        TrainingConfig config;
        config.seed = 77;
        auto const a = fit(table, worlds, config);
        auto const& trace = a.diagnostics.pll_trace;
        for (std::size_t i = 1; i < trace.size(); ++i) {
            CHECK(trace[i] >= trace[i - 1]);
        }
        auto const b = fit(table, worlds, config);
        CHECK(write_model(a.model) == write_model(b.model));
    }

    TEST_CASE("two random starts reach the same optimum")
    {
        Rng rng(5);
        auto const kb = oracle::random_kb(rng, 6, 1.5);
        auto const u = oracle::random_universe(kb, 2);
        GroundingTable const table(u, kb.formulas);
        auto const worlds = exact_worlds(table, kb.weights, 300, 5);
        TrainingConfig config;
        config.init_scale = 2.0;
        config.gradient_tolerance = 1e-8;
        config.max_iterations = 1000;
        config.seed = 1;
        auto const a = fit(table, worlds, config);
        config.seed = 2;
        auto const b = fit(table, worlds, config);
        for (std::size_t i = 0; i < kb.weights.size(); ++i) {
            CHECK(std::abs(a.model.weights[i] - b.model.weights[i]) < 1e-3);
        }
    }

    TEST_CASE("separable data without a prior diverges")
    {
        auto const schema = parse_schema("domain object = {}\npredicate p(object)\npredicate q(object)\n");
        std::vector<Formula> const fs{parse_formula("p(o) => q(o)", schema)};
        auto const u = Universe::with_constants(schema, "object", {"a"});
        GroundingTable const table(u, fs);
        // q always holds when p does
        std::vector<Assignment> const worlds{{1, 1}, {0, 1}, {0, 0}, {1, 1}};
        TrainingConfig config;
        config.prior_sigma = no_prior;
        CHECK_THROWS_AS((void)fit(table, worlds, config), DivergenceError);
        config.prior_sigma = 10.0;
        auto const m = fit(table, worlds, config);
        CHECK(std::isfinite(m.model.weights[0]));
        CHECK(m.model.weights[0] > 1.0);
    }

    TEST_CASE("fixed rule weights stay put")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const rules = parse_rules("hasCategory(o, container) => hasAffordance(o, pour) @ 1.25\n"
                                       "hasShape(o, cylindrical) => hasAffordance(o, pour)\n",
                                       schema);
        auto const worlds = parse_worlds(fixtures::cup_world + "\nworld w2\nhasShape(b, cubic)\n", schema);
        auto const m = fit_rules(schema, rules, worlds, {});
        CHECK(m.model.weights[0] == 1.25);
        CHECK(m.model.weights[1] != 0.0);
    }

    TEST_CASE("per-object batches give the same PLL as a shared universe when formulas stay within an object")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const rules = parse_rules("hasCategory(o, container) => hasAffordance(o, pour)\n", schema);
        std::vector<Formula> const fs{rules[0].formula};
        auto const worlds = parse_worlds(fixtures::cup_world + "\nworld w2\nhasCategory(b, container)\n", schema);
        auto const batches = make_batches(schema, fs, worlds);
        REQUIRE(batches.size() == 1);
        CHECK(batches[0].worlds.size() == 2);
        CHECK(batches[0].table->atom_count() == 44);
    }
}

TEST_SUITE("model_io")
{
    TEST_CASE("model round trip keeps weights bit for bit")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto rules = parse_rules("hasCategory(o, container) => hasAffordance(o, pour) @ 0.1\n"
                                 "hasAffordance(o, a) => !graspRegion(o, r) @ -2.718281828459045\n"
                                 "hasLocation(o, kitchen) @ 1e-300\n",
                                 schema);
        auto model = model_from_weighted_rules(schema, rules);
        auto const text = write_model(model);
        auto const back = read_model(text);
        CHECK(back.schema == model.schema);
        CHECK(back.formulas == model.formulas);
        CHECK(back.weights == model.weights);
        CHECK(back.schema_hash == model.schema_hash);
        CHECK(write_model(back) == text);
    }

    TEST_CASE("malformed model files")
    {
        CHECK_THROWS((void)read_model(""));
        CHECK_THROWS((void)read_model("kbm 2\n"));
        auto const schema = parse_schema("domain object = {}\npredicate h(object)\n");
        auto const text = write_model(model_from_weighted_rules(schema, parse_rules("h(o) @ 1\n", schema)));
        auto broken = text;
        broken.replace(broken.rfind('1'), 1, "x");
        CHECK_THROWS((void)read_model(broken));
        CHECK_THROWS_AS((void)model_from_weighted_rules(schema, parse_rules("h(o)\n", schema)), ValidationError);
    }
}
