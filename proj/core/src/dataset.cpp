#include "graspkb/dataset.hpp"

#include "graspkb/error.hpp"
#include "graspkb/exact.hpp"
#include "graspkb/grounding.hpp"
#include "graspkb/hash.hpp"
#include "graspkb/parser.hpp"
#include "graspkb/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace graspkb {

std::vector<DomainMinimum> const& full_scale_minima()
{
    static std::vector<DomainMinimum> const minima{
        {"shape", 4},    {"texture", 4},     {"material", 4}, {"category", 8},
        {"location", 7}, {"affordance", 14}, {"region", 3},
    };
    return minima;
}

std::size_t object_domain_index(Schema const& schema, std::string_view name)
{
    if (!name.empty()) {
        auto d = schema.find_domain(name);
        if (!d) {
            throw ValidationError("object domain '" + std::string(name) + "' is not declared");
        }
        return *d;
    }
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < schema.domains().size(); ++i) {
        if (schema.domains()[i].open) {
            if (found) {
                throw ValidationError("several open domains; name the object domain explicitly");
            }
            found = i;
        }
    }
    if (!found) {
        throw ValidationError("schema has no open object domain");
    }
    return *found;
}

std::vector<std::string> full_scale_issues(Schema const& schema, std::span<World const> worlds,
                                              std::string_view object_domain)
{
    std::vector<std::string> issues;
    for (auto const& [name, minimum] : full_scale_minima()) {
        auto d = schema.find_domain(name);
        if (!d) {
            issues.push_back("domain '" + name + "' is missing");
        } else if (schema.domain(*d).constants.size() < minimum) {
            issues.push_back("domain '" + name + "' has " + std::to_string(schema.domain(*d).constants.size()) +
                             " values, needs at least " + std::to_string(minimum));
        }
    }
    std::optional<std::size_t> obj;
    try {
        obj = object_domain_index(schema, object_domain.empty() ? "object" : object_domain);
    } catch (ValidationError const& e) {
        issues.push_back(e.what());
    }
    if (!obj) {
        return issues;
    }
    for (auto const& w : worlds) {
        if (w.atoms.empty()) {
            issues.push_back("world '" + w.id + "' is empty");
            continue;
        }
        auto const objects = w.constants_of(schema, *obj);
        if (objects.size() != 1) {
            issues.push_back("world '" + w.id + "' describes " + std::to_string(objects.size()) +
                             " objects, expected 1");
        }
    }
    return issues;
}

std::string_view split_name(Split s) noexcept
{
    return s == Split::train ? "train" : "test";
}

std::vector<World> Corpus::select(Split s) const
{
    std::vector<World> out;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        if (splits[i] == s) {
            out.push_back(worlds[i]);
        }
    }
    return out;
}

void assign_split(Corpus& corpus, double ratio, std::uint64_t seed, std::string_view object_domain)
{
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw ValidationError("split ratio must lie in [0, 1]");
    }
    auto const obj = object_domain_index(corpus.schema, object_domain);
    corpus.ratio = ratio;
    corpus.seed = seed;
    corpus.groups.clear();
    std::set<std::string> keys;
    for (auto const& w : corpus.worlds) {
        auto only = single_constant(corpus.schema, w, obj);
        corpus.groups.push_back(only ? *only : "#" + w.id);
        keys.insert(corpus.groups.back());
    }
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    for (auto const& k : keys) {
        ranked.emplace_back(derive_seed(seed, fnv1a64(k)), k);
    }
    std::sort(ranked.begin(), ranked.end());
    auto const n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ranked.size())));
    std::set<std::string> train;
    for (std::size_t i = 0; i < n_train; ++i) {
        train.insert(ranked[i].second);
    }
    corpus.splits.clear();
    for (auto const& g : corpus.groups) {
        corpus.splits.push_back(train.contains(g) ? Split::train : Split::test);
    }
}

Corpus ingest(std::string_view schema_text, std::string_view worlds_text, IngestOptions const& options)
{
    Corpus corpus;
    corpus.schema = parse_schema(schema_text);
    corpus.worlds = parse_worlds(worlds_text, corpus.schema);
    if (options.full_scale_profile) {
        auto const issues = full_scale_issues(corpus.schema, corpus.worlds, options.object_domain);
        if (!issues.empty()) {
            std::string msg = "corpus violates the full-scale profile:";
            for (auto const& i : issues) {
                msg += "\n  " + i;
            }
            throw ValidationError(msg);
        }
    }
    assign_split(corpus, options.ratio, options.seed, options.object_domain);
    return corpus;
}

Corpus synthesize(Model const& model, SynthOptions const& options)
{
    auto const obj = object_domain_index(model.schema, options.object_domain);
    if (options.objects == 0 || options.worlds_per_object == 0) {
        throw ValidationError("synthesis needs at least one object and one world per object");
    }
    auto const width = std::to_string(options.objects - 1).size();
    auto object_name = [&](std::size_t j) {
        auto digits = std::to_string(j);
        return options.object_prefix + std::string(width - digits.size(), '0') + digits;
    };

    // Every block has the same structure, so one table serves all objects;
    // only the constant name differs when converting back to worlds.
    GroundingTable const table(Universe::with_constants(model.schema, model.schema.domain(obj).name, {"_"}),
                               model.formulas);
    if (table.atom_count() > max_enumerated_atoms) {
        throw ValidationError("synthesis block has " + std::to_string(table.atom_count()) +
                              " ground atoms; exact sampling is capped at " + std::to_string(max_enumerated_atoms));
    }
    std::vector<AtomId> free(table.atom_count());
    std::iota(free.begin(), free.end(), AtomId{0});
    Assignment const clamped(table.atom_count(), 0);

    Corpus corpus;
    corpus.schema = model.schema;
    for (std::size_t j = 0; j < options.objects; ++j) {
        auto const name = object_name(j);
        auto const universe = Universe::with_constants(model.schema, model.schema.domain(obj).name, {name});
        Rng rng(derive_seed(options.seed, j));
        auto const states = sample_exact(table, model.weights, free, clamped, options.worlds_per_object, rng);
        for (std::size_t k = 0; k < states.size(); ++k) {
            Assignment x = clamped;
            apply_state(free, states[k], x);
            corpus.worlds.push_back(universe.to_world("w" + name + "_" + std::to_string(k), x));
        }
    }
    assign_split(corpus, options.ratio, options.seed, model.schema.domain(obj).name);
    return corpus;
}

} // namespace graspkb
