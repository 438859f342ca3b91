#include "fixtures.hpp"

#include "graspkb/error.hpp"
#include "graspkb/parser.hpp"
#include "graspkb/random.hpp"

#include <doctest.h>

#include <algorithm>

using namespace graspkb;

TEST_SUITE("logic")
{
    TEST_CASE("schema with an undeclared domain is rejected")
    {
        CHECK_THROWS_AS((void)parse_schema("domain shape = {cubic, cylindrical}\npredicate hasShape(object, shape)\n"),
                        ParseError);
    }

    TEST_CASE("full attribute schema yields seven predicates in source order")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        REQUIRE(schema.predicates().size() == 7);
        std::vector<std::string> names;
        for (auto const& p : schema.predicates()) {
            names.push_back(p.name);
        }
        CHECK(names == std::vector<std::string>{"hasShape", "hasTexture", "hasMaterial", "hasCategory",
                                                "hasLocation", "hasAffordance", "graspRegion"});
        CHECK(schema.domain(*schema.find_domain("affordance")).constants.size() == 14);
        CHECK(schema.domain(*schema.find_domain("object")).open);
    }

    TEST_CASE("empty schema document")
    {
        CHECK(parse_schema("").empty());
        CHECK(parse_schema("# only a comment\n\n").empty());
    }

    TEST_CASE("schema errors")
    {
        CHECK_THROWS_AS((void)parse_schema("domain a = {x}\ndomain a = {y}\n"), ParseError);
        CHECK_THROWS_AS((void)parse_schema("domain a = {x, x}\n"), ParseError);
        CHECK_THROWS_AS((void)parse_schema("domain a = {x\n"), ParseError);
        CHECK_THROWS_AS((void)parse_schema("predicate p()\n"), ParseError);
        try {
            (void)parse_schema("domain a = {x}\npredicate p(a, b)\n");
            FAIL("expected an error");
        } catch (ParseError const& e) {
            CHECK(e.line() == 2);
        }
    }

    TEST_CASE("rule with a body atom and a head")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const rules = parse_rules("hasCategory(o, container) => hasAffordance(o, pour)\n", schema);
        REQUIRE(rules.size() == 1);
        auto const& f = rules[0].formula;
        CHECK(f.body.size() == 1);
        CHECK(f.head_positive);
        REQUIRE(f.variables.size() == 1);
        CHECK(f.variables[0].name == "o");
        CHECK(!rules[0].weight);
    }

    TEST_CASE("free head variable is typed by position")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const rules = parse_rules("hasAffordance(o, a) => graspRegion(o, r)\n", schema);
        auto const& vars = rules[0].formula.variables;
        REQUIRE(vars.size() == 3);
        auto r = std::find_if(vars.begin(), vars.end(), [](auto const& v) { return v.name == "r"; });
        REQUIRE(r != vars.end());
        CHECK(schema.domain(r->domain).name == "region");
    }

    TEST_CASE("rule errors")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        CHECK_THROWS_AS((void)parse_rules("hasShape(o, x, y) => hasAffordance(o, pour)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_rules("hasShape(o, container) => hasAffordance(o, pour)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_rules("isRed(o) => hasAffordance(o, pour)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_rules("!hasShape(o, cubic) => hasAffordance(o, pour)\n", schema), ParseError);
        // one variable used with two domains
        CHECK_THROWS_AS((void)parse_rules("hasShape(o, x) => hasMaterial(o, x)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_rules("hasShape(o, cubic) => hasAffordance(o, pour) @ abc\n", schema), ParseError);
    }

    TEST_CASE("weights, negated heads and plus expansion")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const rules = parse_rules("hasCategory(o, container) => !hasAffordance(o, cut) @ -1.5\n"
                                       "hasAffordance(o, pour) @ 0.25\n"
                                       "hasShape(o, +s) => hasAffordance(o, stack)\n",
                                       schema);
        REQUIRE(rules.size() == 2 + 4);
        CHECK(!rules[0].formula.head_positive);
        CHECK(rules[0].weight == doctest::Approx(-1.5));
        CHECK(rules[1].formula.body.empty());
        for (std::size_t i = 2; i < rules.size(); ++i) {
            CHECK(rules[i].formula.body[0].args[1].kind == Term::Kind::constant);
            CHECK(rules[i].formula.body[0].args[1].index == i - 2);
        }
        CHECK_THROWS_AS((void)parse_rules("hasShape(+o, cubic) => hasAffordance(o, stack)\n", schema), ParseError);
    }

    TEST_CASE("world block with four atoms")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const worlds = parse_worlds(fixtures::cup_world, schema);
        REQUIRE(worlds.size() == 1);
        CHECK(worlds[0].id == "w1");
        CHECK(worlds[0].atoms.size() == 4);
    }

    TEST_CASE("empty world block and duplicate ids")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const worlds = parse_worlds("world empty\n\nworld w2\nhasShape(x, cubic)\n", schema);
        REQUIRE(worlds.size() == 2);
        CHECK(worlds[0].atoms.empty());
        CHECK_THROWS_AS((void)parse_worlds("world w1\nhasShape(a, cubic)\n\nworld w1\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_worlds("world w1\nhasShape(a, square)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_worlds("world w1\nhasShape(a, cubic)\nhasShape(a, cubic)\n", schema), ParseError);
        CHECK_THROWS_AS((void)parse_worlds("world w1\nhasShape(a, s)\n", schema), ParseError);
    }

    TEST_CASE("world atom order does not matter")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const a = parse_worlds(fixtures::cup_world, schema);
        auto const b = parse_worlds("world w1\ngraspRegion(cup1, 2)\nhasAffordance(cup1, pour)\n"
                                    "hasCategory(cup1, container)\nhasShape(cup1, cylindrical)\n",
                                    schema);
        CHECK(a == b);
    }

    TEST_CASE("round trip of schema, rules and worlds")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        CHECK(parse_schema(write_schema(schema)) == schema);

        auto const rules = parse_rules("hasCategory(o, container) => hasAffordance(o, pour) @ 0.1\n"
                                       "hasAffordance(o, a) ^ hasShape(o, cubic) => !graspRegion(o, r)\n"
                                       "hasLocation(o, kitchen)\n",
                                       schema);
        CHECK(parse_rules(write_rules(schema, rules), schema) == rules);

        auto const worlds = parse_worlds(fixtures::cup_world + "\nworld w2\n\nworld w3\nhasShape(b, cubic)\n", schema);
        CHECK(parse_worlds(write_worlds(schema, worlds), schema) == worlds);
    }

    TEST_CASE("atom index is a bijection")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const u = Universe::with_constants(schema, "object", {"a", "b"});
        // 2 * (4 + 4 + 4 + 8 + 7 + 14 + 3)
        REQUIRE(u.atom_count() == 88);
        std::vector<bool> seen(u.atom_count(), false);
        for (AtomId id = 0; id < u.atom_count(); ++id) {
            auto const sym = u.symbolic(id);
            auto const back = u.find(sym);
            REQUIRE(back);
            CHECK(*back == id);
            CHECK(!seen[id]);
            seen[id] = true;
        }
    }

    TEST_CASE("universe harvests open constants and indexes worlds")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const worlds = parse_worlds(fixtures::cup_world + "\nworld w2\nhasShape(box, cubic)\n", schema);
        auto const u = Universe::from_worlds(schema, worlds);
        auto const obj = *schema.find_domain("object");
        CHECK(u.domain_size(obj) == 2);
        auto const x = u.index(worlds[0]);
        CHECK(std::count(x.begin(), x.end(), 1) == 4);
        CHECK(u.to_world("w1", x) == worlds[0]);

        auto const small = Universe::with_constants(schema, "object", {"box"});
        CHECK_THROWS_AS((void)small.index(worlds[0]), ValidationError);
    }

    TEST_CASE("formula text is canonical")
    {
        auto const schema = parse_schema(fixtures::grasp_schema);
        auto const f = parse_formula("hasAffordance( o,a )^hasShape(o,cubic)=>!graspRegion(o , r)", schema);
        CHECK(formula_text(schema, f) == "hasAffordance(o, a) ^ hasShape(o, cubic) => !graspRegion(o, r)");
    }
}
