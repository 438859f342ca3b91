#include "fixtures.hpp"
#include "oracles.hpp"

#include "graspkb/error.hpp"
#include "graspkb/exact.hpp"
#include "graspkb/parser.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace graspkb;

namespace {

struct Kb {
    Schema schema;
    std::vector<Formula> formulas;
    std::vector<double> weights;
};

Kb make(std::string const& schema_text, std::string const& rules_text)
{
    Kb kb;
    kb.schema = parse_schema(schema_text);
    for (auto const& r : parse_rules(rules_text, kb.schema)) {
        kb.formulas.push_back(r.formula);
        kb.weights.push_back(r.weight.value_or(0.0));
    }
    return kb;
}

std::vector<AtomId> all_atoms(std::size_t n)
{
    std::vector<AtomId> v(n);
    std::iota(v.begin(), v.end(), AtomId{0});
    return v;
}

} // namespace

TEST_SUITE("exact")
{
    TEST_CASE("zero weights give zero log joint")
    {
        Rng rng(3);
        auto kb = oracle::random_kb(rng, 5, 1.0);
        std::fill(kb.weights.begin(), kb.weights.end(), 0.0);
        GroundingTable const table(oracle::random_universe(kb, 2), kb.formulas);
        for (int i = 0; i < 10; ++i) {
            CHECK(log_joint(table, kb.weights, oracle::random_world(rng, table.atom_count())) == 0.0);
        }
    }

    TEST_CASE("weight ln 2 with three true groundings")
    {
        auto const kb = make("domain object = {}\npredicate p(object)\npredicate q(object)\n", "p(o) => q(o)\n");
        GroundingTable const table(Universe::with_constants(kb.schema, "object", {"a", "b", "c"}), kb.formulas);
        Assignment const x(table.atom_count(), 0);
        double const w[] = {std::log(2.0)};
        CHECK(log_joint(table, w, x) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));
    }

    TEST_CASE("container versus electronics pour term")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        std::vector<Formula> fs;
        for (auto const& r : parse_rules("hasCategory(o, container) => hasAffordance(o, pour)\n"
                                         "hasCategory(o, electronics) => hasAffordance(o, pour)\n",
                                         schema)) {
            fs.push_back(r.formula);
        }
        auto const u = Universe::with_constants(schema, "object", {"x"});
        GroundingTable const table(u, fs);
        double const w[] = {std::log(0.67), std::log(0.07)};
        auto world = [&](char const* category) {
            Assignment x(u.atom_count(), 0);
            x[*u.find(parse_ground_atom(std::string("hasCategory(x, ") + category + ")", schema))] = 1;
            return x;
        };
        // pour false: only the formula whose body holds is violated
        double const container = log_joint(table, w, world("container"));
        double const electronics = log_joint(table, w, world("electronics"));
        CHECK(electronics - container == doctest::Approx(std::log(0.67 / 0.07)).epsilon(1e-12));
        CHECK(std::log(0.67 / 0.07) == doctest::Approx(2.258).epsilon(1e-3));
    }

    TEST_CASE("single free atom: uniform and logistic")
    {
        auto const kb = make("domain object = {}\npredicate h(object)\n", "h(o)\n");
        GroundingTable const table(Universe::with_constants(kb.schema, "object", {"a"}), kb.formulas);
        Assignment const clamped(1, 0);
        AtomId const free[] = {0};
        GroundingTable const none(Universe::with_constants(kb.schema, "object", {"a"}), {});
        CHECK(enumerate(none, std::vector<double>{}, free, clamped).marginals[0] == doctest::Approx(0.5));
        for (double w : {0.0, 1.0, -2.5, 7.0}) {
            double const ws[] = {w};
            auto const r = enumerate(table, ws, free, clamped);
            CHECK(r.marginals[0] == doctest::Approx(std::exp(w) / (std::exp(w) + 1.0)).epsilon(1e-14));
        }
    }

    TEST_CASE("marginals and log Z match independent summation")
    {
        Rng rng(20);
        for (int trial = 0; trial < 15; ++trial) {
            auto const kb = oracle::random_kb(rng, 5, 3.0);
            auto const u = oracle::random_universe(kb, 1 + rng.below(2));
            GroundingTable const table(u, kb.formulas);
            // free: a random subset of up to 10 atoms, rest clamped at random
            auto clamped = oracle::random_world(rng, u.atom_count());
            std::vector<AtomId> free;
            for (AtomId a = 0; a < u.atom_count() && free.size() < 10; ++a) {
                if (rng.uniform() < 0.8) {
                    free.push_back(a);
                }
            }
            auto const mine = enumerate(table, kb.weights, free, clamped);
            auto const ref = oracle::enumerate(u, kb.formulas, kb.weights, free, clamped);
            CHECK(mine.log_z == doctest::Approx(ref.log_z).epsilon(1e-12));
            for (std::size_t j = 0; j < free.size(); ++j) {
                CHECK(std::abs(mine.marginals[j] - ref.marginals[j]) < 1e-12);
            }
        }
    }

    TEST_CASE("joint table sums to one and agrees with marginals")
    {
        Rng rng(21);
        auto const kb = oracle::random_kb(rng, 6, 3.0);
        auto const u = oracle::random_universe(kb, 2);
        GroundingTable const table(u, kb.formulas);
        auto const free = all_atoms(u.atom_count());
        ExactOptions options;
        options.keep_joint = true;
        options.conjunctions = {{free[0], free[1]}, {free[2]}};
        auto const r = enumerate(table, kb.weights, free, Assignment(u.atom_count(), 0), options);
        REQUIRE(r.joint.size() == (std::size_t{1} << free.size()));
        double total = 0.0;
        double m0 = 0.0;
        double both = 0.0;
        for (std::size_t s = 0; s < r.joint.size(); ++s) {
            total += r.joint[s];
            m0 += (s & 1U) ? r.joint[s] : 0.0;
            both += (s & 3U) == 3U ? r.joint[s] : 0.0;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(std::abs(m0 - r.marginals[0]) < 1e-12);
        CHECK(std::abs(both - r.conjunction_probabilities[0]) < 1e-12);
        CHECK(std::abs(r.conjunction_probabilities[1] - r.marginals[2]) < 1e-12);
    }

    TEST_CASE("constant shift of the energy leaves marginals unchanged")
    {
        Rng rng(22);
        auto const kb = oracle::random_kb(rng, 5, 3.0);
        auto const u = oracle::random_universe(kb, 2);
        // append a formula that is satisfied in every state
        auto formulas = kb.formulas;
        auto weights = kb.weights;
        formulas.push_back(parse_formula("heavy(o) => heavy(o)", kb.schema));
        weights.push_back(4.25);
        GroundingTable const base(u, kb.formulas);
        GroundingTable const shifted(u, formulas);
        auto const free = all_atoms(u.atom_count());
        Assignment const clamped(u.atom_count(), 0);
        auto const a = enumerate(base, kb.weights, free, clamped);
        auto const b = enumerate(shifted, weights, free, clamped);
        // two groundings, one per object
        CHECK(b.log_z - a.log_z == doctest::Approx(2.0 * 4.25).epsilon(1e-12));
        for (std::size_t j = 0; j < free.size(); ++j) {
            CHECK(std::abs(a.marginals[j] - b.marginals[j]) < 1e-12);
        }
    }

    TEST_CASE("clamping an implied atom leaves other marginals unchanged")
    {
        auto const kb = make("domain object = {}\npredicate h(object)\npredicate p(object)\npredicate q(object)\n",
                             "h(o) @ 50\nh(o) => p(o) @ 1.5\np(o) => q(o) @ -0.7\nq(o) @ 0.3\n");
        auto const u = Universe::with_constants(kb.schema, "object", {"a"});
        GroundingTable const table(u, kb.formulas);
        auto const h = *u.find(parse_ground_atom("h(a)", kb.schema));
        auto const p = *u.find(parse_ground_atom("p(a)", kb.schema));
        auto const q = *u.find(parse_ground_atom("q(a)", kb.schema));
        AtomId const all[] = {h, p, q};
        auto const open = enumerate(table, kb.weights, all, Assignment(u.atom_count(), 0));
        REQUIRE(open.marginal(h) == 1.0);
        Assignment clamped(u.atom_count(), 0);
        clamped[h] = 1;
        AtomId const rest[] = {p, q};
        auto const fixed = enumerate(table, kb.weights, rest, clamped);
        CHECK(std::abs(open.marginal(p) - fixed.marginal(p)) < 1e-9);
        CHECK(std::abs(open.marginal(q) - fixed.marginal(q)) < 1e-9);
    }

    TEST_CASE("relabeling objects permutes marginals")
    {
        Rng rng(23);
        for (int trial = 0; trial < 5; ++trial) {
            auto const kb = oracle::random_kb(rng, 5, 2.0);
            auto const u = oracle::random_universe(kb, 2);
            GroundingTable const table(u, kb.formulas);
            auto const evidence = oracle::random_world(rng, u.atom_count());
            auto swap = [&](AtomId id) {
                auto sym = u.symbolic(id);
                for (auto& a : sym.args) {
                    a = a == "o0" ? "o1" : (a == "o1" ? "o0" : a);
                }
                return *u.find(sym);
            };
            std::vector<AtomId> free;
            Assignment clamped(u.atom_count(), 0);
            Assignment swapped(u.atom_count(), 0);
            for (AtomId a = 0; a < u.atom_count(); ++a) {
                if (u.symbolic(a).args.size() == 1 && u.symbolic(a).args[0] != "o0" &&
                    u.symbolic(a).args[0] != "o1") {
                    // warm(color) atoms are shared; keep them free
                    free.push_back(a);
                } else if (rng.uniform() < 0.5) {
                    free.push_back(a);
                } else {
                    clamped[a] = evidence[a];
                }
            }
            std::vector<AtomId> free_swapped;
            for (auto a : free) {
                free_swapped.push_back(swap(a));
            }
            for (AtomId a = 0; a < u.atom_count(); ++a) {
                swapped[swap(a)] = clamped[a];
            }
            auto const r1 = enumerate(table, kb.weights, free, clamped);
            auto const r2 = enumerate(table, kb.weights, free_swapped, swapped);
            for (std::size_t j = 0; j < free.size(); ++j) {
                CHECK(std::abs(r1.marginals[j] - r2.marginals[j]) < 1e-12);
            }
        }
    }

    TEST_CASE("caps and input checks")
    {
        auto const kb = make("domain object = {}\npredicate h(object)\n", "h(o)\n");
        std::vector<std::string> names;
        for (int i = 0; i < 26; ++i) {
            names.push_back("o" + std::to_string(i));
        }
        GroundingTable const table(Universe::with_constants(kb.schema, "object", names), kb.formulas);
        auto const free = all_atoms(26);
        double const w[] = {0.1};
        CHECK_THROWS_AS((void)enumerate(table, w, free, Assignment(26, 0)), ValidationError);
        std::vector<AtomId> const dup = {0, 0};
        CHECK_THROWS_AS((void)enumerate(table, w, dup, Assignment(26, 0)), ValidationError);
        double const bad[] = {std::nan("")};
        std::vector<AtomId> const one = {0};
        CHECK_THROWS_AS((void)enumerate(table, bad, one, Assignment(26, 0)), ValidationError);
        ExactOptions joint;
        joint.keep_joint = true;
        std::vector<AtomId> const many(free.begin(), free.begin() + 21);
        CHECK_THROWS_AS((void)enumerate(table, w, many, Assignment(26, 0), joint), ValidationError);
    }

    TEST_CASE("exact sampling frequencies")
    {
        Rng rng(24);
        auto const kb = oracle::random_kb(rng, 5, 2.0);
        auto const u = oracle::random_universe(kb, 1);
        GroundingTable const table(u, kb.formulas);
        auto const free = all_atoms(u.atom_count());
        Assignment const clamped(u.atom_count(), 0);
        auto const exact = enumerate(table, kb.weights, free, clamped);
        std::size_t const n = 20000;
        Rng draw(5);
        auto const states = sample_exact(table, kb.weights, free, clamped, n, draw);
        for (std::size_t j = 0; j < free.size(); ++j) {
            double hits = 0.0;
            for (auto s : states) {
                hits += (s >> j) & 1U;
            }
            double const p = exact.marginals[j];
            double const sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(hits / static_cast<double>(n) - p) <= 4.0 * sd + 1e-12);
        }
        Rng again(5);
        CHECK(sample_exact(table, kb.weights, free, clamped, n, again) == states);
    }
}
