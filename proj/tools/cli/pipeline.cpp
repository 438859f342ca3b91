#include "cli/commands.hpp"

#include "graspkb/dataset.hpp"
#include "graspkb/error.hpp"
#include "graspkb/learner.hpp"
#include "graspkb/metrics.hpp"
#include "graspkb/model_io.hpp"
#include "graspkb/parser.hpp"
#include "graspkb/query.hpp"
#include "graspkb/random.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace graspkb::cli {

namespace {

struct Column {
    std::string name;
    std::vector<std::string> observed;
};

std::vector<std::string> split_plus(std::string_view text)
{
    std::string commas(text);
    std::replace(commas.begin(), commas.end(), '+', ',');
    return split_list(commas);
}

/// Columns from --column flags, or the default visual / categorical /
/// all-attributes trio restricted to predicates the schema declares.
std::vector<Column> resolve_columns(Schema const& schema, std::vector<std::string> const& attributes,
                                    std::vector<std::string> const& flags)
{
    std::vector<Column> columns;
    if (!flags.empty()) {
        for (auto const& flag : flags) {
            auto const eq = flag.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw UsageError("--column expects name=pred1+pred2, got '" + flag + "'");
            }
            Column c{flag.substr(0, eq), split_plus(std::string_view(flag).substr(eq + 1))};
            for (auto const& p : c.observed) {
                if (std::find(attributes.begin(), attributes.end(), p) == attributes.end()) {
                    throw ValidationError("column '" + c.name + "': '" + p + "' is not an attribute predicate");
                }
            }
            columns.push_back(std::move(c));
        }
        return columns;
    }
    auto keep = [&](std::string name, std::vector<std::string> wanted) {
        std::vector<std::string> present;
        for (auto& p : wanted) {
            if (schema.find_predicate(p)) {
                present.push_back(std::move(p));
            }
        }
        if (!present.empty()) {
            columns.push_back(Column{std::move(name), std::move(present)});
        }
    };
    keep("visual", {"hasShape", "hasTexture", "hasMaterial"});
    keep("categorical", {"hasCategory"});
    keep("all+location", attributes);
    return columns;
}

struct Scorer {
    std::string name;
    Model const* model = nullptr;
};

std::string format4(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

} // namespace

void cmd_eval_pipeline(Context& ctx, PipelineArgs const& args)
{
    bool const synthetic = !args.model.empty();
    if (synthetic == (!args.schema.empty() || !args.worlds.empty())) {
        throw UsageError("eval pipeline takes either --model, or --schema with --worlds and --rules");
    }

    Corpus corpus;
    std::optional<Model> generating;
    std::vector<Rule> rules;
    if (synthetic) {
        generating = read_model(ctx.read_input("model", args.model));
        SynthOptions synth;
        synth.objects = args.objects;
        synth.worlds_per_object = args.worlds_per_object;
        synth.seed = ctx.seed();
        synth.ratio = args.ratio;
        synth.object_domain = args.object_domain;
        corpus = synthesize(*generating, synth);
        if (args.rules.empty()) {
            for (auto const& f : generating->formulas) {
                rules.push_back(Rule{f, std::nullopt});
            }
        }
    } else {
        if (args.schema.empty() || args.worlds.empty() || args.rules.empty()) {
            throw UsageError("a corpus pipeline needs --schema, --worlds and --rules");
        }
        IngestOptions options;
        options.ratio = args.ratio;
        options.seed = ctx.seed();
        options.object_domain = args.object_domain;
        corpus = ingest(ctx.read_input("schema", args.schema), ctx.read_input("worlds", args.worlds), options);
    }
    if (!args.rules.empty()) {
        rules = parse_rules(ctx.read_input("rules", args.rules), corpus.schema);
    }
    auto const& schema = corpus.schema;
    auto const obj = object_domain_index(schema, args.object_domain);
    ctx.mark("corpus");

    std::vector<std::string> attributes;
    for (auto const& p : schema.predicates()) {
        if (p.name != args.affordance_predicate && p.name != args.region_predicate) {
            attributes.push_back(p.name);
        }
    }
    auto const columns = resolve_columns(schema, attributes, args.columns);
    if (columns.empty()) {
        throw ValidationError("no evidence column has a predicate in the schema");
    }
    auto const affordance_pred = schema.find_predicate(args.affordance_predicate);
    if (!affordance_pred) {
        throw ValidationError("schema has no predicate '" + args.affordance_predicate + "'");
    }
    auto const& affordance_domain = schema.domain(schema.predicate(*affordance_pred).arg_domains.at(1));

    TrainingConfig config;
    config.prior_sigma = parse_sigma(args.prior_sigma);
    config.max_iterations = args.max_iter;
    config.seed = ctx.seed();
    auto const train = corpus.select(Split::train);
    auto const test = corpus.select(Split::test);
    auto const learned = fit_rules(schema, rules, train, config);
    ctx.mark("learn");

    Json config_echo{{"synthetic", synthetic},
                     {"objects", args.objects},
                     {"worlds_per_object", args.worlds_per_object},
                     {"ratio", args.ratio},
                     {"prior_sigma", args.prior_sigma},
                     {"max_iter", args.max_iter},
                     {"samples", args.samples},
                     {"burn_in", args.burn_in},
                     {"chains", args.chains},
                     {"exact_limit", args.exact_limit}};
    Json cols = Json::array();
    for (auto const& c : columns) {
        cols.push_back(Json{{"name", c.name}, {"observed", c.observed}});
    }
    config_echo["columns"] = std::move(cols);
    ctx.config() = std::move(config_echo);

    std::vector<Scorer> scorers{{"random", nullptr}, {"learned", &learned.model}};
    if (generating) {
        scorers.push_back({"generating", &*generating});
    }

    SamplerConfig sampler;
    sampler.chains = args.chains;
    sampler.burn_in = args.burn_in;
    sampler.samples = args.samples;

    // table[scorer][column] = mean AUC
    std::vector<std::vector<double>> table(scorers.size(), std::vector<double>(columns.size(), 0.0));
    Json details = Json::object();
    std::size_t skipped_worlds = 0;
    std::size_t queries = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto const& column = columns[c];
        std::set<std::size_t> observed;
        for (auto const& p : column.observed) {
            observed.insert(*schema.find_predicate(p));
        }
        std::vector<std::string> hidden;
        for (auto const& p : attributes) {
            if (!observed.contains(*schema.find_predicate(p))) {
                hidden.push_back(p);
            }
        }

        for (std::size_t s = 0; s < scorers.size(); ++s) {
            std::map<std::string, std::vector<ScoredLabel>> scored;
            std::map<std::string, std::vector<std::pair<std::string, double>>> cache;
            Rng rng(derive_seed(ctx.seed(), 1000 + c));
            for (std::size_t w = 0; w < test.size(); ++w) {
                auto const object = single_constant(schema, test[w], obj);
                if (!object) {
                    skipped_worlds += (s == 0 && c == 0) ? 1 : 0;
                    continue;
                }
                QuerySpec spec;
                spec.object = *object;
                spec.affordance_predicate = args.affordance_predicate;
                spec.region_predicate = args.region_predicate;
                spec.hidden_predicates = hidden;
                spec.require_mention = false;
                spec.evidence.id = test[w].id;
                std::string key;
                for (auto const& a : test[w].atoms) {
                    if (observed.contains(a.predicate)) {
                        spec.evidence.atoms.push_back(a);
                        SymbolicAtom generic = a;
                        for (std::size_t k = 0; k < generic.args.size(); ++k) {
                            if (schema.predicate(a.predicate).arg_domains[k] == obj) {
                                generic.args[k] = "_";
                            }
                        }
                        key += atom_text(schema, generic) + ";";
                    }
                }

                std::vector<std::pair<std::string, double>> marginals;
                if (scorers[s].model == nullptr) {
                    for (auto const& a : affordance_domain.constants) {
                        marginals.emplace_back(a, rng.uniform());
                    }
                } else if (auto it = cache.find(key); it != cache.end()) {
                    marginals = it->second;
                } else {
                    auto const problem = build_query_problem(*scorers[s].model, spec);
                    sampler.seed = derive_seed(ctx.seed(), queries++);
                    auto const result = problem.free_atoms.size() <= args.exact_limit
                                            ? exact_query(*scorers[s].model, spec)
                                            : gibbs_query(*scorers[s].model, spec, sampler);
                    marginals = result.affordance_marginals;
                    cache.emplace(key, marginals);
                }
                for (auto const& [name, p] : marginals) {
                    SymbolicAtom const atom{*affordance_pred, {*object, name}};
                    bool const truth = std::binary_search(test[w].atoms.begin(), test[w].atoms.end(), atom);
                    scored[name].push_back(ScoredLabel{p, truth});
                }
            }
            auto const report = mean_auc_per_affordance(scored);
            table[s][c] = report.mean;
            Json per = Json::object();
            for (auto const& [name, value] : report.per_affordance) {
                per[name] = value;
            }
            details[scorers[s].name][column.name] = Json{{"mean", report.mean}, {"per_affordance", per}};
        }
        ctx.mark("score " + column.name);
    }

    std::string csv = "scorer";
    for (auto const& c : columns) {
        csv += "," + c.name;
    }
    csv += "\n";
    for (std::size_t s = 0; s < scorers.size(); ++s) {
        csv += scorers[s].name;
        for (double v : table[s]) {
            csv += "," + format4(v);
        }
        csv += "\n";
    }
    ctx.diagnostics() = Json{{"train_worlds", train.size()},
                             {"test_worlds", test.size()},
                             {"skipped_test_worlds", skipped_worlds},
                             {"final_pll", learned.diagnostics.final_pll},
                             {"converged", learned.diagnostics.converged},
                             {"auc", std::move(details)}};
    ctx.write_output(csv);
}

} // namespace graspkb::cli
