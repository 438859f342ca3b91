#include "cli/app.hpp"

#include "cli/commands.hpp"
#include "cli/context.hpp"

#include "graspkb/error.hpp"
#include "graspkb/query.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

#ifndef GRASPKB_VERSION
#define GRASPKB_VERSION "unknown"
#endif

namespace graspkb::cli {

namespace {

struct Invocation {
    std::string name;
    std::function<void(Context&)> body;
};

int report(Context& ctx, int code, std::string const& kind, std::string const& message)
{
    std::cerr << "graspkb: " << kind << ": " << message << "\n";
    ctx.finish(code, kind + ": " + message);
    return code;
}

} // namespace

int run(int argc, char const* const* argv)
{
    CLI::App app{"Grasp-affordance knowledge bases: learn, query, map and evaluate.", "graspkb"};
    app.set_version_flag("--version", GRASPKB_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Random seed")->default_val(0);
    app.add_option("--out", global.out, "Primary output file (stdout when omitted)");
    app.add_option("--manifest", global.manifest, "Run manifest file (default <out>.manifest.json)");

    Invocation chosen;
    auto select = [&chosen](std::string name, auto body) {
        return [&chosen, name = std::move(name), body]() {
            chosen.name = name;
            chosen.body = body;
        };
    };

    IngestArgs ingest;
    auto* ci = app.add_subcommand("ingest", "Parse, validate and split a corpus");
    ci->add_option("--schema", ingest.schema, "Schema file (.kbs)")->required();
    ci->add_option("--worlds", ingest.worlds, "Worlds file (.kbw)")->required();
    ci->add_option("--profile", ingest.profile, "Cardinality profile")
        ->check(CLI::IsMember({"none", "paper"}))
        ->capture_default_str();
    ci->add_option("--ratio", ingest.ratio, "Train share of objects")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    ci->add_option("--object-domain", ingest.object_domain, "Object domain (default: the open domain)");
    ci->add_option("--train-out", ingest.train_out, "Write the train worlds here");
    ci->add_option("--test-out", ingest.test_out, "Write the test worlds here");
    ci->callback(select("ingest", [&ingest](Context& c) { cmd_ingest(c, ingest); }));

    SynthArgs synth;
    auto* cs = app.add_subcommand("synth", "Sample a corpus from a weighted model");
    cs->add_option("--model", synth.model, "Model file (.kbm)")->required();
    cs->add_option("--objects", synth.objects, "Number of objects")->check(CLI::PositiveNumber)->capture_default_str();
    cs->add_option("--worlds-per-object", synth.worlds_per_object, "Worlds per object")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cs->add_option("--ratio", synth.ratio, "Train share of objects")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cs->add_option("--object-domain", synth.object_domain, "Object domain (default: the open domain)");
    cs->add_option("--prefix", synth.prefix, "Object name prefix")->capture_default_str();
    cs->add_option("--schema-out", synth.schema_out, "Write the model schema here");
    cs->add_option("--split-out", synth.split_out, "Write the corpus split JSON here");
    cs->callback(select("synth", [&synth](Context& c) { cmd_synth(c, synth); }));

    LearnArgs learn;
    auto* cl = app.add_subcommand("learn", "Fit formula weights by pseudo-likelihood");
    cl->add_option("--schema", learn.schema, "Schema file (.kbs)")->required();
    cl->add_option("--rules", learn.rules, "Rules file (.kbr)")->required();
    cl->add_option("--worlds", learn.worlds, "Training worlds (.kbw)")->required();
    cl->add_option("--prior-sigma", learn.prior_sigma, "Gaussian prior sigma, or inf")->capture_default_str();
    cl->add_option("--max-iter", learn.max_iter, "L-BFGS iteration cap")->capture_default_str();
    cl->add_option("--tol", learn.tol, "Gradient-norm tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    cl->add_option("--history", learn.history, "L-BFGS history")->check(CLI::PositiveNumber)->capture_default_str();
    cl->add_option("--init-scale", learn.init_scale, "Uniform initial weight range")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cl->add_option("--max-weight", learn.max_weight, "Divergence bound on |w|")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cl->add_option("--split", learn.split, "Worlds to train on")
        ->check(CLI::IsMember({"all", "train"}))
        ->capture_default_str();
    cl->add_option("--ratio", learn.ratio, "Train share when --split train")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cl->add_option("--object-domain", learn.object_domain, "Object domain (default: the open domain)");
    cl->callback(select("learn", [&learn](Context& c) { cmd_learn(c, learn); }));

    QueryArgs query;
    std::string affordance;
    auto* cq = app.add_subcommand("query", "Rank (affordance, region) pairs for an object");
    cq->add_option("--model", query.model, "Model file (.kbm)")->required();
    cq->add_option("--evidence", query.evidence, "Evidence worlds (.kbw)")->required();
    cq->add_option("--world", query.world, "Evidence world id when the file has several");
    cq->add_option("--object", query.object, "Object constant")->required();
    cq->add_option("--affordance", affordance, "Restrict the selected grasp to this affordance");
    cq->add_option("--samples", query.samples, "Kept sweeps per chain")->check(CLI::PositiveNumber)->capture_default_str();
    cq->add_option("--burn-in", query.burn_in, "Discarded sweeps per chain")->capture_default_str();
    cq->add_option("--chains", query.chains, "Independent chains")->check(CLI::PositiveNumber)->capture_default_str();
    cq->add_flag("--exact", query.exact, "Enumerate instead of sampling");
    cq->add_option("--hidden", query.hidden, "Comma-separated unobserved predicates");
    cq->add_option("--affordance-predicate", query.affordance_predicate)->capture_default_str();
    cq->add_option("--region-predicate", query.region_predicate)->capture_default_str();
    cq->callback(select("query", [&query, &affordance](Context& c) {
        if (!affordance.empty()) {
            query.affordance = affordance;
        }
        cmd_query(c, query);
    }));

    MapArgs map;
    auto* cm = app.add_subcommand("map", "Cluster a cloud into regions and emit the grasp pose of one");
    cm->add_option("--cloud", map.cloud, "Point cloud (.xyz text or binary .ply)")->required();
    cm->add_option("--region", map.region, "Region label");
    cm->add_option("--query", map.query, "Query result JSON supplying the selected region");
    cm->add_option("--regions", map.regions, "Number of regions")->check(CLI::PositiveNumber)->capture_default_str();
    cm->add_option("--restarts", map.restarts, "k-means restarts")->check(CLI::PositiveNumber)->capture_default_str();
    cm->callback(select("map", [&map](Context& c) { cmd_map(c, map); }));

    auto* ce = app.add_subcommand("eval", "Evaluation tools");
    ce->require_subcommand(1);

    EvalExactArgs exact;
    auto* cee = ce->add_subcommand("exact", "Exact marginals by enumeration");
    cee->add_option("--model", exact.model, "Model file (.kbm)")->required();
    cee->add_option("--evidence", exact.evidence, "Evidence worlds (.kbw)");
    cee->add_option("--world", exact.world, "Evidence world id when the file has several");
    cee->add_option("--objects", exact.objects, "Comma-separated extra object constants");
    cee->add_option("--free", exact.free, "Comma-separated free predicates (default: those absent from evidence)");
    cee->callback(select("eval exact", [&exact](Context& c) { cmd_eval_exact(c, exact); }));

    EvalHausdorffArgs haus;
    auto* ceh = ce->add_subcommand("hausdorff", "Per-image rectangle Hausdorff distance");
    ceh->add_option("--rects", haus.rects, "Rectangle CSV")->required();
    ceh->add_option("--samples", haus.samples, "Perimeter samples per side")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ceh->add_flag("--directed", haus.directed, "Prediction-to-truth directed distance only");
    ceh->callback(select("eval hausdorff", [&haus](Context& c) { cmd_eval_hausdorff(c, haus); }));

    EvalAucArgs aucs;
    auto* cea = ce->add_subcommand("auc", "Per-affordance ROC AUC");
    cea->add_option("--scores", aucs.scores, "CSV affordance,score,label")->required();
    cea->callback(select("eval auc", [&aucs](Context& c) { cmd_eval_auc(c, aucs); }));

    PipelineArgs pipe;
    auto* cep = ce->add_subcommand("pipeline", "Split, learn and score affordance prediction");
    cep->add_option("--model", pipe.model, "Generating model; the corpus is sampled from it");
    cep->add_option("--schema", pipe.schema, "Schema of an existing corpus");
    cep->add_option("--worlds", pipe.worlds, "Worlds of an existing corpus");
    cep->add_option("--rules", pipe.rules, "Rules to learn (default: the generating model's formulas)");
    cep->add_option("--objects", pipe.objects, "Synthetic objects")->check(CLI::PositiveNumber)->capture_default_str();
    cep->add_option("--worlds-per-object", pipe.worlds_per_object, "Synthetic worlds per object")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cep->add_option("--ratio", pipe.ratio, "Train share of objects")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cep->add_option("--prior-sigma", pipe.prior_sigma, "Gaussian prior sigma, or inf")->capture_default_str();
    cep->add_option("--max-iter", pipe.max_iter, "L-BFGS iteration cap")->capture_default_str();
    cep->add_option("--column", pipe.columns, "Evidence column name=pred1+pred2 (repeatable)");
    cep->add_option("--samples", pipe.samples, "Gibbs sweeps per chain")->check(CLI::PositiveNumber)->capture_default_str();
    cep->add_option("--burn-in", pipe.burn_in, "Gibbs burn-in")->capture_default_str();
    cep->add_option("--chains", pipe.chains, "Gibbs chains")->check(CLI::PositiveNumber)->capture_default_str();
    cep->add_option("--exact-limit", pipe.exact_limit, "Enumerate when free atoms are at most this")
        ->capture_default_str();
    cep->add_option("--affordance-predicate", pipe.affordance_predicate)->capture_default_str();
    cep->add_option("--region-predicate", pipe.region_predicate)->capture_default_str();
    cep->add_option("--object-domain", pipe.object_domain, "Object domain (default: the open domain)");
    cep->callback(select("eval pipeline", [&pipe](Context& c) { cmd_eval_pipeline(c, pipe); }));

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    Context ctx(global, chosen.name);
    try {
        chosen.body(ctx);
    } catch (UsageError const& e) {
        return report(ctx, exit_usage, "usage", e.what());
    } catch (AffordanceUnavailable const& e) {
        return report(ctx, exit_validation, "validation", e.what());
    } catch (ParseError const& e) {
        return report(ctx, exit_validation, "parse", e.what());
    } catch (ValidationError const& e) {
        return report(ctx, exit_validation, "validation", e.what());
    } catch (DivergenceError const& e) {
        return report(ctx, exit_numeric, "divergence", e.what());
    } catch (NumericError const& e) {
        return report(ctx, exit_numeric, "numeric", e.what());
    } catch (std::exception const& e) {
        return report(ctx, exit_internal, "error", e.what());
    }
    ctx.finish(exit_ok);
    return exit_ok;
}

} // namespace graspkb::cli
