#include "cli/commands.hpp"

#include "graspkb/cloud_io.hpp"
#include "graspkb/dataset.hpp"
#include "graspkb/hash.hpp"
#include "graspkb/learner.hpp"
#include "graspkb/model_io.hpp"
#include "graspkb/parser.hpp"
#include "graspkb/patches.hpp"
#include "graspkb/query.hpp"

#include <cmath>
#include <set>

namespace graspkb::cli {

namespace {

Json corpus_json(Corpus const& corpus, std::string const& object_domain)
{
    Json j;
    j["seed"] = corpus.seed;
    j["ratio"] = corpus.ratio;
    j["object_domain"] = object_domain;
    j["worlds"] = corpus.worlds.size();
    std::set<std::string> groups[2];
    std::size_t counts[2] = {0, 0};
    Json membership = Json::array();
    for (std::size_t i = 0; i < corpus.worlds.size(); ++i) {
        auto const s = static_cast<std::size_t>(corpus.splits[i]);
        groups[s].insert(corpus.groups[i]);
        ++counts[s];
        membership.push_back(Json{{"world", corpus.worlds[i].id},
                                  {"group", corpus.groups[i]},
                                  {"split", std::string(split_name(corpus.splits[i]))}});
    }
    j["groups"] = groups[0].size() + groups[1].size();
    for (auto s : {Split::train, Split::test}) {
        auto const k = static_cast<std::size_t>(s);
        j[std::string(split_name(s))] = Json{{"worlds", counts[k]}, {"groups", groups[k]}};
    }
    j["membership"] = std::move(membership);
    return j;
}

std::string object_domain_name(Schema const& schema, std::string const& requested)
{
    return schema.domain(object_domain_index(schema, requested)).name;
}

World pick_world(std::vector<World> const& worlds, std::string const& id, std::string const& file)
{
    if (!id.empty()) {
        for (auto const& w : worlds) {
            if (w.id == id) {
                return w;
            }
        }
        throw ValidationError("world '" + id + "' not found in " + file);
    }
    if (worlds.size() != 1) {
        throw ValidationError(file + " holds " + std::to_string(worlds.size()) +
                              " worlds; choose one with --world");
    }
    return worlds.front();
}

Json vec_json(Vec3 const& v)
{
    return Json::array({v.x(), v.y(), v.z()});
}

} // namespace

void cmd_ingest(Context& ctx, IngestArgs const& args)
{
    auto const schema_text = ctx.read_input("schema", args.schema);
    auto const worlds_text = ctx.read_input("worlds", args.worlds);
    ctx.config() = Json{{"profile", args.profile}, {"ratio", args.ratio}, {"object_domain", args.object_domain}};

    IngestOptions options;
    options.full_scale_profile = args.profile == "paper";
    options.ratio = args.ratio;
    options.seed = ctx.seed();
    options.object_domain = args.object_domain;
    auto const corpus = ingest(schema_text, worlds_text, options);
    ctx.mark("ingest");

    auto report = corpus_json(corpus, object_domain_name(corpus.schema, args.object_domain));
    report["profile"] = args.profile;
    report["schema_fnv1a64"] = content_hash(schema_text);
    report["worlds_fnv1a64"] = content_hash(worlds_text);
    ctx.diagnostics() = Json{{"worlds", corpus.worlds.size()}, {"groups", report["groups"]}};
    ctx.write_output(report.dump(2) + "\n");
    if (!args.train_out.empty()) {
        auto const train = corpus.select(Split::train);
        ctx.write_aux("train", args.train_out, write_worlds(corpus.schema, train));
    }
    if (!args.test_out.empty()) {
        auto const test = corpus.select(Split::test);
        ctx.write_aux("test", args.test_out, write_worlds(corpus.schema, test));
    }
}

void cmd_synth(Context& ctx, SynthArgs const& args)
{
    auto const model = read_model(ctx.read_input("model", args.model));
    ctx.config() = Json{{"objects", args.objects},
                        {"worlds_per_object", args.worlds_per_object},
                        {"ratio", args.ratio},
                        {"object_domain", args.object_domain},
                        {"prefix", args.prefix}};

    SynthOptions options;
    options.objects = args.objects;
    options.worlds_per_object = args.worlds_per_object;
    options.seed = ctx.seed();
    options.ratio = args.ratio;
    options.object_domain = args.object_domain;
    options.object_prefix = args.prefix;
    auto const corpus = synthesize(model, options);
    ctx.mark("synthesize");

    ctx.diagnostics() = Json{{"worlds", corpus.worlds.size()}};
    ctx.write_output(write_worlds(corpus.schema, corpus.worlds));
    if (!args.schema_out.empty()) {
        ctx.write_aux("schema", args.schema_out, write_schema(corpus.schema));
    }
    if (!args.split_out.empty()) {
        auto const report = corpus_json(corpus, object_domain_name(corpus.schema, args.object_domain));
        ctx.write_aux("split", args.split_out, report.dump(2) + "\n");
    }
}

void cmd_learn(Context& ctx, LearnArgs const& args)
{
    auto const schema_text = ctx.read_input("schema", args.schema);
    auto const rules_text = ctx.read_input("rules", args.rules);
    auto const worlds_text = ctx.read_input("worlds", args.worlds);

    TrainingConfig config;
    config.prior_sigma = parse_sigma(args.prior_sigma);
    config.max_iterations = args.max_iter;
    config.gradient_tolerance = args.tol;
    config.history = args.history;
    config.init_scale = args.init_scale;
    config.max_abs_weight = args.max_weight;
    config.seed = ctx.seed();
    ctx.config() = Json{{"prior_sigma", args.prior_sigma},
                        {"max_iter", args.max_iter},
                        {"tol", args.tol},
                        {"history", args.history},
                        {"init_scale", args.init_scale},
                        {"max_weight", args.max_weight},
                        {"split", args.split},
                        {"ratio", args.ratio}};

    IngestOptions options;
    options.ratio = args.ratio;
    options.seed = ctx.seed();
    options.object_domain = args.object_domain;
    auto const corpus = ingest(schema_text, worlds_text, options);
    auto const rules = parse_rules(rules_text, corpus.schema);
    auto const worlds = args.split == "train" ? corpus.select(Split::train) : corpus.worlds;
    ctx.mark("parse");

    auto learned = fit_rules(corpus.schema, rules, worlds, config);
    ctx.mark("fit");
    learned.model.schema_hash = content_hash(schema_text);
    learned.model.rules_hash = content_hash(rules_text);

    auto const& d = learned.diagnostics;
    ctx.diagnostics() = Json{{"training_worlds", worlds.size()},
                             {"formulas", learned.model.formulas.size()},
                             {"final_pll", d.final_pll},
                             {"iterations", d.iterations},
                             {"gradient_norm", d.gradient_norm},
                             {"converged", d.converged},
                             {"message", d.message}};
    ctx.write_output(write_model(learned.model));
}

void cmd_query(Context& ctx, QueryArgs const& args)
{
    auto const model = read_model(ctx.read_input("model", args.model));
    auto const evidence = parse_worlds(ctx.read_input("evidence", args.evidence), model.schema);

    QuerySpec spec;
    spec.object = args.object;
    spec.affordance = args.affordance;
    spec.affordance_predicate = args.affordance_predicate;
    spec.region_predicate = args.region_predicate;
    spec.evidence = pick_world(evidence, args.world, args.evidence);
    spec.hidden_predicates = split_list(args.hidden);

    SamplerConfig sampler;
    sampler.chains = args.chains;
    sampler.burn_in = args.burn_in;
    sampler.samples = args.samples;
    sampler.seed = ctx.seed();
    ctx.config() = Json{{"object", args.object},
                        {"world", spec.evidence.id},
                        {"affordance", args.affordance ? Json(*args.affordance) : Json(nullptr)},
                        {"method", args.exact ? "exact" : "gibbs"},
                        {"samples", args.samples},
                        {"burn_in", args.burn_in},
                        {"chains", args.chains},
                        {"hidden", spec.hidden_predicates}};
    ctx.mark("parse");

    auto const result = args.exact ? exact_query(model, spec) : gibbs_query(model, spec, sampler);
    ctx.mark("inference");

    Json out;
    out["object"] = result.object;
    out["method"] = result.method;
    out["affordance"] = args.affordance ? Json(*args.affordance) : Json(nullptr);
    Json pairs = Json::array();
    for (auto const& p : result.pairs) {
        pairs.push_back(Json{{"affordance", p.affordance},
                             {"region", p.region},
                             {"probability", round6(p.probability)},
                             {"co_truth", round6(p.co_truth)}});
    }
    out["pairs"] = std::move(pairs);
    double selected_p = 0.0;
    for (auto const& p : result.pairs) {
        if (p.affordance == result.selected.first && p.region == result.selected.second) {
            selected_p = p.probability;
        }
    }
    out["selected"] = Json{{"affordance", result.selected.first},
                           {"region", result.selected.second},
                           {"probability", round6(selected_p)}};
    Json per_region = Json::array();
    for (auto const& r : result.best_per_region) {
        per_region.push_back(
            Json{{"region", r.region}, {"affordance", r.affordance}, {"probability", round6(r.probability)}});
    }
    out["best_per_region"] = std::move(per_region);
    Json marg = Json::object();
    for (auto const& [name, p] : result.affordance_marginals) {
        marg[args.affordance_predicate][name] = round6(p);
    }
    for (auto const& [name, p] : result.region_marginals) {
        marg[args.region_predicate][name] = round6(p);
    }
    out["marginals"] = std::move(marg);
    out["diagnostics"] = Json{{"chains", result.chains},
                              {"kept_sweeps", result.kept_sweeps},
                              {"max_split_rhat", round6(result.max_split_rhat)},
                              {"max_chain_disagreement", round6(result.max_chain_disagreement)},
                              {"no_pair_mass", result.no_pair_mass}};
    ctx.diagnostics() = out["diagnostics"];
    ctx.write_output(out.dump(2) + "\n");
}

void cmd_map(Context& ctx, MapArgs const& args)
{
    auto const cloud = parse_cloud(ctx.read_input("cloud", args.cloud));
    std::string label = args.region;
    if (!args.query.empty()) {
        Json q;
        try {
            q = Json::parse(ctx.read_input("query", args.query));
        } catch (Json::exception const& e) {
            throw ValidationError("query result '" + args.query + "' is not valid JSON: " + e.what());
        }
        if (!q.contains("selected") || !q["selected"].contains("region") || !q["selected"]["region"].is_string()) {
            throw ValidationError("query result '" + args.query + "' has no selected region");
        }
        auto const from_query = q["selected"]["region"].get<std::string>();
        if (!label.empty() && label != from_query) {
            throw UsageError("--region " + label + " conflicts with the query's selected region " + from_query);
        }
        label = from_query;
    }
    if (label.empty()) {
        throw UsageError("map needs --region or --query");
    }
    ctx.config() = Json{{"region", label}, {"regions", args.regions}, {"restarts", args.restarts}};
    ctx.mark("parse");

    KMeansOptions options;
    options.restarts = args.restarts;
    auto const patches = cluster_patches(cloud, args.regions, ctx.seed(), options);
    auto const& patch = find_patch(patches, label);
    auto const pose = extract_grasp_pose(patch);
    ctx.mark("map");

    Json out;
    out["label"] = pose.label;
    out["position"] = vec_json(pose.position);
    auto const& q = pose.orientation;
    out["quaternion"] = Json::array({q.w(), q.x(), q.y(), q.z()});
    out["residual"] = pose.residual;
    out["normal"] = vec_json(patch.plane.normal);
    out["major_axis"] = vec_json(patch.plane.major_axis);
    out["gamma"] = patch.plane.gamma;
    out["members"] = patch.members.size();

    if (cloud.labeled()) {
        // The cloud carries ground-truth part labels: score the patch against
        // the part of the same label.
        Vec3 sum = Vec3::Zero();
        std::size_t count = 0;
        std::size_t agree = 0;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            if (std::to_string(cloud.labels[i]) == label) {
                sum += cloud.points[i];
                ++count;
            }
        }
        for (auto i : patch.members) {
            agree += std::to_string(cloud.labels[i]) == label ? 1 : 0;
        }
        Json truth;
        truth["points"] = count;
        if (count > 0) {
            Vec3 const centroid = sum / static_cast<double>(count);
            truth["centroid"] = vec_json(centroid);
            truth["centroid_distance"] = (centroid - pose.position).norm();
            // Normalized by the cloud's bounding-box diagonal, like image-space
            // distances are by the image diagonal.
            Vec3 lo = cloud.points.front();
            Vec3 hi = lo;
            for (auto const& p : cloud.points) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
            double const diagonal = (hi - lo).norm();
            truth["normalized_centroid_distance"] =
                diagonal > 0.0 ? (centroid - pose.position).norm() / diagonal : 0.0;
        }
        truth["label_agreement"] =
            patch.members.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(patch.members.size());
        out["truth"] = std::move(truth);
    }
    ctx.diagnostics() = Json{{"patches", patches.size()}, {"residual", pose.residual}};
    ctx.write_output(out.dump(2) + "\n");
}

} // namespace graspkb::cli
