#pragma once

#include "cli/context.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace graspkb::cli {

struct IngestArgs {
    std::string schema;
    std::string worlds;
    std::string profile = "none";
    double ratio = 0.7;
    std::string object_domain;
    std::string train_out;
    std::string test_out;
};
void cmd_ingest(Context& ctx, IngestArgs const& args);

struct SynthArgs {
    std::string model;
    std::size_t objects = 10;
    std::size_t worlds_per_object = 1;
    double ratio = 0.7;
    std::string object_domain;
    std::string prefix = "obj";
    std::string schema_out;
    std::string split_out;
};
void cmd_synth(Context& ctx, SynthArgs const& args);

struct LearnArgs {
    std::string schema;
    std::string rules;
    std::string worlds;
    std::string prior_sigma = "10";
    std::size_t max_iter = 1000;
    double tol = 1e-5;
    std::size_t history = 7;
    double init_scale = 0.0;
    double max_weight = 50.0;
    std::string split = "all";
    double ratio = 0.7;
    std::string object_domain;
};
void cmd_learn(Context& ctx, LearnArgs const& args);

struct QueryArgs {
    std::string model;
    std::string evidence;
    std::string world;
    std::string object;
    std::optional<std::string> affordance;
    std::size_t samples = 10000;
    std::size_t burn_in = 1000;
    std::size_t chains = 3;
    bool exact = false;
    std::string hidden;
    std::string affordance_predicate = "hasAffordance";
    std::string region_predicate = "graspRegion";
};
void cmd_query(Context& ctx, QueryArgs const& args);

struct MapArgs {
    std::string cloud;
    std::string region;
    std::string query;
    std::size_t regions = 3;
    std::size_t restarts = 20;
};
void cmd_map(Context& ctx, MapArgs const& args);

struct EvalExactArgs {
    std::string model;
    std::string evidence;
    std::string world;
    std::string objects;
    std::string free;
};
void cmd_eval_exact(Context& ctx, EvalExactArgs const& args);

struct EvalHausdorffArgs {
    std::string rects;
    std::size_t samples = 64;
    bool directed = false;
};
void cmd_eval_hausdorff(Context& ctx, EvalHausdorffArgs const& args);

struct EvalAucArgs {
    std::string scores;
};
void cmd_eval_auc(Context& ctx, EvalAucArgs const& args);

struct PipelineArgs {
    std::string model;
    std::string schema;
    std::string worlds;
    std::string rules;
    std::size_t objects = 40;
    std::size_t worlds_per_object = 82;
    double ratio = 0.7;
    std::string prior_sigma = "10";
    std::size_t max_iter = 1000;
    std::vector<std::string> columns;
    std::size_t samples = 2000;
    std::size_t burn_in = 200;
    std::size_t chains = 2;
    std::size_t exact_limit = 20;
    std::string affordance_predicate = "hasAffordance";
    std::string region_predicate = "graspRegion";
    std::string object_domain;
};
void cmd_eval_pipeline(Context& ctx, PipelineArgs const& args);

} // namespace graspkb::cli
