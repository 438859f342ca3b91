#include "graspkb/query.hpp"

#include "graspkb/exact.hpp"

#include <algorithm>
#include <set>

namespace graspkb {

namespace {

std::size_t binary_predicate(Schema const& schema, std::string const& name)
{
    auto p = schema.find_predicate(name);
    if (!p) {
        throw ValidationError("query predicate '" + name + "' is not declared");
    }
    if (schema.predicate(*p).arity() != 2) {
        throw ValidationError("query predicate '" + name + "' must take (object, value)");
    }
    return *p;
}

std::string join(std::vector<std::string> const& items)
{
    std::string out;
    for (auto const& s : items) {
        out += out.empty() ? s : ", " + s;
    }
    return out.empty() ? "none" : out;
}

bool pair_less(PairProbability const& a, PairProbability const& b)
{
    return std::tie(a.affordance, a.region) < std::tie(b.affordance, b.region);
}

QueryResult assemble(QueryProblem const& problem, QuerySpec const& spec, std::vector<double> const& co_truth,
                     std::vector<double> const& marginals)
{
    QueryResult result;
    result.object = spec.object;
    auto marginal_of = [&](AtomId atom) {
        auto it = std::find(problem.free_atoms.begin(), problem.free_atoms.end(), atom);
        return marginals[static_cast<std::size_t>(it - problem.free_atoms.begin())];
    };
    for (std::size_t a = 0; a < problem.affordances.size(); ++a) {
        result.affordance_marginals.emplace_back(problem.affordances[a], marginal_of(problem.affordance_atoms[a]));
    }
    for (std::size_t r = 0; r < problem.regions.size(); ++r) {
        result.region_marginals.emplace_back(problem.regions[r], marginal_of(problem.region_atoms[r]));
    }

    double total = 0.0;
    for (double c : co_truth) {
        total += c;
    }
    result.no_pair_mass = total <= 0.0;
    auto const n_pairs = static_cast<double>(co_truth.size());
    std::size_t k = 0;
    for (auto const& a : problem.affordances) {
        for (auto const& r : problem.regions) {
            double const p = result.no_pair_mass ? 1.0 / n_pairs : co_truth[k] / total;
            result.pairs.push_back({a, r, p, co_truth[k]});
            ++k;
        }
    }
    std::stable_sort(result.pairs.begin(), result.pairs.end(), [](auto const& x, auto const& y) {
        if (x.probability != y.probability) {
            return x.probability > y.probability;
        }
        return pair_less(x, y);
    });

    for (auto const& r : problem.regions) {
        RegionChoice best{r, {}, -1.0};
        // pairs are ranked, so the first hit is the best with tie-break applied
        for (auto const& p : result.pairs) {
            if (p.region == r) {
                best.affordance = p.affordance;
                best.probability = p.probability;
                break;
            }
        }
        result.best_per_region.push_back(best);
    }
    result.selected = select_grasp(result, spec.affordance);
    return result;
}

} // namespace

AffordanceUnavailable::AffordanceUnavailable(std::string const& affordance, std::vector<std::string> alternatives)
    : ValidationError("affordance unavailable: '" + affordance + "' has no posterior mass; alternatives: " +
                      join(alternatives)),
      alternatives_(std::move(alternatives))
{
}

QueryProblem build_query_problem(Model const& model, QuerySpec const& spec)
{
    auto const& schema = model.schema;
    auto const aff_pred = binary_predicate(schema, spec.affordance_predicate);
    auto const reg_pred = binary_predicate(schema, spec.region_predicate);
    auto const obj_domain = schema.predicate(aff_pred).arg_domains[0];
    if (schema.predicate(reg_pred).arg_domains[0] != obj_domain) {
        throw ValidationError("query predicates disagree on the object domain");
    }
    if (spec.object.empty()) {
        throw ValidationError("query needs an object constant");
    }

    std::set<std::size_t> hidden;
    for (auto const& name : spec.hidden_predicates) {
        auto p = schema.find_predicate(name);
        if (!p) {
            throw ValidationError("hidden predicate '" + name + "' is not declared");
        }
        if (*p == aff_pred || *p == reg_pred) {
            throw ValidationError("query predicates cannot also be hidden");
        }
        hidden.insert(*p);
    }

    World evidence{spec.evidence.id, {}};
    bool mentioned = false;
    for (auto const& atom : spec.evidence.atoms) {
        auto const& pred = schema.predicate(atom.predicate);
        bool other = false;
        bool mine = false;
        for (std::size_t i = 0; i < pred.arity(); ++i) {
            if (pred.arg_domains[i] == obj_domain) {
                (atom.args[i] == spec.object ? mine : other) = true;
            }
        }
        mentioned = mentioned || mine;
        if (other) {
            continue;
        }
        if (atom.predicate == aff_pred || atom.predicate == reg_pred) {
            throw ValidationError("evidence contains query atom " + atom_text(schema, atom));
        }
        if (hidden.contains(atom.predicate)) {
            throw ValidationError("evidence contains hidden atom " + atom_text(schema, atom));
        }
        evidence.atoms.push_back(atom);
    }
    if (!mentioned && spec.require_mention) {
        throw ValidationError("object '" + spec.object + "' does not appear in the evidence");
    }

    auto universe = Universe::with_constants(schema, schema.domain(obj_domain).name, {spec.object});
    QueryProblem problem;
    problem.evidence = universe.index(evidence);
    problem.table = std::make_shared<GroundingTable const>(std::move(universe), model.formulas);
    auto const& u = problem.table->universe();

    std::size_t const obj[1] = {0};
    auto const aff_domain = schema.predicate(aff_pred).arg_domains[1];
    auto const reg_domain = schema.predicate(reg_pred).arg_domains[1];
    for (std::size_t a = 0; a < u.domain_size(aff_domain); ++a) {
        std::size_t const args[2] = {obj[0], a};
        problem.affordances.emplace_back(u.constants(aff_domain)[a]);
        problem.affordance_atoms.push_back(u.atom_id(aff_pred, args));
    }
    for (std::size_t r = 0; r < u.domain_size(reg_domain); ++r) {
        std::size_t const args[2] = {obj[0], r};
        problem.regions.emplace_back(u.constants(reg_domain)[r]);
        problem.region_atoms.push_back(u.atom_id(reg_pred, args));
    }
    if (problem.affordances.empty() || problem.regions.empty()) {
        throw ValidationError("query has no (affordance, region) pairs");
    }
    problem.free_atoms = problem.affordance_atoms;
    problem.free_atoms.insert(problem.free_atoms.end(), problem.region_atoms.begin(), problem.region_atoms.end());
    for (auto p : hidden) {
        auto const begin = u.predicate_offset(p);
        for (std::size_t k = 0; k < u.predicate_atom_count(p); ++k) {
            problem.free_atoms.push_back(static_cast<AtomId>(begin + k));
        }
    }
    for (auto a : problem.affordance_atoms) {
        for (auto r : problem.region_atoms) {
            problem.pair_conjunctions.push_back({a, r});
        }
    }
    return problem;
}

QueryResult gibbs_query(Model const& model, QuerySpec const& spec, SamplerConfig const& config)
{
    auto const problem = build_query_problem(model, spec);
    auto const est = gibbs_marginals(*problem.table, model.weights, problem.evidence, problem.free_atoms,
                                     problem.pair_conjunctions, config);
    auto result = assemble(problem, spec, est.conjunction_probabilities, est.marginals);
    result.method = "gibbs";
    result.max_split_rhat = est.max_split_rhat;
    result.max_chain_disagreement = est.max_chain_disagreement;
    result.chains = config.chains;
    result.kept_sweeps = est.kept_sweeps;
    return result;
}

QueryResult exact_query(Model const& model, QuerySpec const& spec)
{
    auto const problem = build_query_problem(model, spec);
    ExactOptions options;
    options.conjunctions = problem.pair_conjunctions;
    auto const exact = enumerate(*problem.table, model.weights, problem.free_atoms, problem.evidence, options);
    auto result = assemble(problem, spec, exact.conjunction_probabilities, exact.marginals);
    result.method = "exact";
    return result;
}

std::pair<std::string, std::string> select_grasp(QueryResult const& result,
                                                 std::optional<std::string> const& affordance)
{
    if (result.pairs.empty()) {
        throw ValidationError("empty posterior");
    }
    PairProbability const* best = nullptr;
    for (auto const& p : result.pairs) {
        if (affordance && p.affordance != *affordance) {
            continue;
        }
        if (!best || p.probability > best->probability ||
            (p.probability == best->probability && pair_less(p, *best))) {
            best = &p;
        }
    }
    if (!best || (affordance && best->probability <= 0.0)) {
        std::set<std::string> alternatives;
        for (auto const& p : result.pairs) {
            if (p.probability > 0.0 && (!affordance || p.affordance != *affordance)) {
                alternatives.insert(p.affordance);
            }
        }
        throw AffordanceUnavailable(affordance.value_or(""), {alternatives.begin(), alternatives.end()});
    }
    return {best->affordance, best->region};
}

} // namespace graspkb
