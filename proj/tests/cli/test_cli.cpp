#include "cli/app.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path const fixtures = GRASPKB_FIXTURE_DIR;

fs::path scratch(std::string const& name)
{
    auto dir = fs::temp_directory_path() / "graspkb_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return std::move(s).str();
}

void spit(fs::path const& p, std::string const& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

int tool(std::vector<std::string> args)
{
    args.insert(args.begin(), "graspkb");
    std::vector<char const*> argv;
    for (auto const& a : args) {
        argv.push_back(a.c_str());
    }
    return graspkb::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string fx(char const* name)
{
    return (fixtures / name).string();
}

nlohmann::json learn_and_query(fs::path const& dir, std::vector<std::string> extra)
{
    auto const model = (dir / "m.kbm").string();
    REQUIRE(tool({"learn", "--schema", fx("grasp.kbs"), "--rules", fx("grasp.kbr"), "--worlds", fx("corpus.kbw"),
                     "--out", model}) == 0);
    std::vector<std::string> args{"query", "--model", model, "--evidence", fx("cup.kbw"), "--object", "cup1",
                                  "--out", (dir / "q.json").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(tool(args) == 0);
    return nlohmann::json::parse(slurp(dir / "q.json"));
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("learn writes a model that query reads, with a manifest")
    {
        auto const dir = scratch("learn");
        auto const q = learn_and_query(dir, {});
        CHECK(q["object"] == "cup1");
        CHECK(q["pairs"].size() == 42);
        REQUIRE(q["best_per_region"].size() == 3);
        CHECK(q["best_per_region"][0]["affordance"] == "stack");
        CHECK(q["best_per_region"][1]["affordance"] == "pour");
        CHECK(q["best_per_region"][2]["affordance"] == "handover");
        CHECK(q["selected"]["affordance"] == "stack");
        CHECK(q["selected"]["region"] == "1");

        auto const manifest = nlohmann::json::parse(slurp(dir / "q.json.manifest.json"));
        CHECK(manifest["subcommand"] == "query");
        CHECK(manifest["exit_code"] == 0);
        CHECK(manifest["inputs"]["model"]["fnv1a64"].get<std::string>().size() == 16);
        CHECK(manifest["timings_ms"].contains("total"));
    }

    TEST_CASE("probabilities are reported with six decimals")
    {
        auto const q = learn_and_query(scratch("decimals"), {});
        for (auto const& p : q["pairs"]) {
            double const v = p["probability"].get<double>();
            CHECK(std::abs(v * 1e6 - std::round(v * 1e6)) < 1e-6);
        }
    }

    TEST_CASE("--affordance constrains the selected grasp")
    {
        auto const q = learn_and_query(scratch("affordance"), {"--affordance", "pour"});
        CHECK(q["selected"]["affordance"] == "pour");
        CHECK(q["selected"]["region"] == "2");
    }

    TEST_CASE("unknown object exits with a validation error")
    {
        auto const dir = scratch("unknown");
        auto const model = (dir / "m.kbm").string();
        REQUIRE(tool({"learn", "--schema", fx("grasp.kbs"), "--rules", fx("grasp.kbr"), "--worlds",
                         fx("corpus.kbw"), "--out", model}) == 0);
        CHECK(tool({"query", "--model", model, "--evidence", fx("cup.kbw"), "--object", "mug9", "--out",
                       (dir / "q.json").string()}) == graspkb::cli::exit_validation);
        auto const manifest = nlohmann::json::parse(slurp(dir / "q.json.manifest.json"));
        CHECK(manifest["exit_code"] == 3);
        CHECK(manifest["error"].get<std::string>().find("mug9") != std::string::npos);
    }

    TEST_CASE("no prior on separable data aborts as divergent")
    {
        auto const dir = scratch("separable");
        spit(dir / "s.kbs", "domain object = {}\npredicate p(object)\npredicate q(object)\n");
        spit(dir / "r.kbr", "p(o)\np(o) => q(o)\n");
        spit(dir / "w.kbw", "world a\np(x1)\nq(x1)\n\nworld b\np(x2)\nq(x2)\n\nworld c\np(x3)\nq(x3)\n");
        auto const out = (dir / "m.kbm").string();
        CHECK(tool({"learn", "--schema", (dir / "s.kbs").string(), "--rules", (dir / "r.kbr").string(),
                       "--worlds", (dir / "w.kbw").string(), "--prior-sigma", "inf", "--out", out}) ==
              graspkb::cli::exit_numeric);
        auto const manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
        CHECK(manifest["error"].get<std::string>().rfind("divergence", 0) == 0);
        // The same data with the default prior is fine.
        CHECK(tool({"learn", "--schema", (dir / "s.kbs").string(), "--rules", (dir / "r.kbr").string(),
                       "--worlds", (dir / "w.kbw").string(), "--out", out}) == 0);
    }

    TEST_CASE("usage errors exit 2")
    {
        auto const dir = scratch("usage");
        CHECK(tool({}) == graspkb::cli::exit_usage);
        CHECK(tool({"frobnicate"}) == graspkb::cli::exit_usage);
        CHECK(tool({"query", "--model", fx("generator.kbm")}) == graspkb::cli::exit_usage);
        CHECK(tool({"learn", "--schema", fx("grasp.kbs"), "--rules", fx("grasp.kbr"), "--worlds",
                       fx("corpus.kbw"), "--prior-sigma", "-1", "--out", (dir / "m.kbm").string()}) ==
              graspkb::cli::exit_usage);
        CHECK(tool({"map", "--cloud", (dir / "missing.xyz").string(), "--region", "1", "--out",
                       (dir / "p.json").string()}) == graspkb::cli::exit_usage);
        CHECK(tool({"eval"}) == graspkb::cli::exit_usage);
    }

    TEST_CASE("malformed input exits 3")
    {
        auto const dir = scratch("malformed");
        spit(dir / "bad.kbs", "domain shape = {a, a}\n");
        CHECK(tool({"ingest", "--schema", (dir / "bad.kbs").string(), "--worlds", fx("corpus.kbw"), "--out",
                       (dir / "c.json").string()}) == graspkb::cli::exit_validation);
        spit(dir / "small.kbs", "domain object = {}\ndomain shape = {a}\npredicate hasShape(object, shape)\n");
        spit(dir / "small.kbw", "world w\nhasShape(o, a)\n");
        CHECK(tool({"ingest", "--schema", (dir / "small.kbs").string(), "--worlds", (dir / "small.kbw").string(),
                       "--profile", "paper", "--out", (dir / "c.json").string()}) ==
              graspkb::cli::exit_validation);
    }

    TEST_CASE("ingest reports the object-level split")
    {
        auto const dir = scratch("ingest");
        REQUIRE(tool({"ingest", "--schema", fx("grasp.kbs"), "--worlds", fx("corpus.kbw"), "--profile", "paper",
                         "--seed", "4", "--out", (dir / "c.json").string(), "--train-out",
                         (dir / "train.kbw").string(), "--test-out", (dir / "test.kbw").string()}) == 0);
        auto const c = nlohmann::json::parse(slurp(dir / "c.json"));
        CHECK(c["groups"] == 8);
        CHECK(c["train"]["groups"].size() == 6);
        CHECK(c["test"]["groups"].size() == 2);
        CHECK(c["membership"].size() == 48);
        CHECK(c["seed"] == 4);
        CHECK(!slurp(dir / "train.kbw").empty());
    }

    TEST_CASE("map on the mug gives a unit quaternion; one region sits at the centroid")
    {
        auto const dir = scratch("map");
        REQUIRE(tool({"map", "--cloud", fx("mug.xyz"), "--region", "2", "--out", (dir / "p.json").string()}) ==
                0);
        auto const pose = nlohmann::json::parse(slurp(dir / "p.json"));
        double norm = 0.0;
        for (auto const& v : pose["quaternion"]) {
            norm += v.get<double>() * v.get<double>();
        }
        CHECK(std::abs(norm - 1.0) < 1e-12);
        CHECK(pose["label"] == "2");
        CHECK(pose["truth"]["normalized_centroid_distance"].get<double>() < 0.2);

        spit(dir / "flat.xyz", "0 0 0\n1 0 0\n0 2 0\n1 2 0\n");
        REQUIRE(tool({"map", "--cloud", (dir / "flat.xyz").string(), "--regions", "1", "--region", "1", "--out",
                         (dir / "flat.json").string()}) == 0);
        auto const flat = nlohmann::json::parse(slurp(dir / "flat.json"));
        CHECK(flat["position"][0].get<double>() == doctest::Approx(0.5));
        CHECK(flat["position"][1].get<double>() == doctest::Approx(1.0));
        CHECK(flat["position"][2].get<double>() == doctest::Approx(0.0));
        CHECK(flat["residual"].get<double>() < 1e-12);
    }

    TEST_CASE("map takes the region from a query result")
    {
        auto const dir = scratch("map_query");
        learn_and_query(dir, {"--affordance", "pour"});
        REQUIRE(tool({"map", "--cloud", fx("mug.xyz"), "--query", (dir / "q.json").string(), "--out",
                         (dir / "p.json").string()}) == 0);
        CHECK(nlohmann::json::parse(slurp(dir / "p.json"))["label"] == "2");
        CHECK(tool({"map", "--cloud", fx("mug.xyz"), "--query", (dir / "q.json").string(), "--region", "3",
                       "--out", (dir / "p.json").string()}) == graspkb::cli::exit_usage);
    }

    TEST_CASE("eval exact writes one marginal per free atom")
    {
        auto const dir = scratch("exact");
        REQUIRE(tool({"eval", "exact", "--model", fx("generator.kbm"), "--objects", "x", "--out",
                         (dir / "m.csv").string()}) == 0);
        auto const csv = slurp(dir / "m.csv");
        CHECK(csv.rfind("atom,probability\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 15);
        auto const manifest = nlohmann::json::parse(slurp(dir / "m.csv.manifest.json"));
        CHECK(manifest["diagnostics"]["free_atoms"] == 14);
    }

    TEST_CASE("eval hausdorff scores matched images")
    {
        auto const dir = scratch("hausdorff");
        REQUIRE(tool({"eval", "hausdorff", "--rects", fx("rects.csv"), "--out", (dir / "h.csv").string()}) == 0);
        auto const csv = slurp(dir / "h.csv");
        CHECK(csv.find("mug_01,") != std::string::npos);
        CHECK(csv.find("bottle_01") == std::string::npos);
        CHECK(csv.find("median=") != std::string::npos);
        auto const manifest = nlohmann::json::parse(slurp(dir / "h.csv.manifest.json"));
        CHECK(manifest["diagnostics"]["images"] == 4);
        CHECK(manifest["diagnostics"]["unmatched"][0] == "bottle_01");
    }

    TEST_CASE("eval auc reports per-affordance values")
    {
        auto const dir = scratch("auc");
        REQUIRE(tool({"eval", "auc", "--scores", fx("scores.csv"), "--out", (dir / "a.json").string()}) == 0);
        auto const r = nlohmann::json::parse(slurp(dir / "a.json"));
        CHECK(r["per_affordance"]["stack"].get<double>() == 0.75);
        CHECK(r["per_affordance"]["handover"].get<double>() == 0.75);
        CHECK(r["skipped"][0] == "cut");
    }

    TEST_CASE("eval pipeline prints the scorer by evidence table")
    {
        auto const dir = scratch("pipeline");
        REQUIRE(tool({"eval", "pipeline", "--model", fx("generator.kbm"), "--seed", "3", "--out",
                      (dir / "t.csv").string()}) == 0);
        auto const csv = slurp(dir / "t.csv");
        CHECK(csv.rfind("scorer,visual,categorical,all+location\n", 0) == 0);
        CHECK(csv.find("\nrandom,") != std::string::npos);
        CHECK(csv.find("\nlearned,") != std::string::npos);
        CHECK(csv.find("\ngenerating,") != std::string::npos);
        auto const m = nlohmann::json::parse(slurp(dir / "t.csv.manifest.json"));
        double const random = m["diagnostics"]["auc"]["random"]["all+location"]["mean"].get<double>();
        double const generating = m["diagnostics"]["auc"]["generating"]["all+location"]["mean"].get<double>();
        CHECK(generating > random + 0.2);
    }

    TEST_CASE("synth is reproducible and respects the seed")
    {
        auto const dir = scratch("synth");
        auto run = [&](char const* seed, char const* name) {
            REQUIRE(tool({"synth", "--model", fx("generator.kbm"), "--objects", "5", "--seed", seed, "--out",
                             (dir / name).string()}) == 0);
            return slurp(dir / name);
        };
        CHECK(run("1", "a.kbw") == run("1", "b.kbw"));
        CHECK(run("1", "a.kbw") != run("2", "c.kbw"));
    }
}
