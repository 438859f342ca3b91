#pragma once

// Grasp-affordance queries: posterior over (affordance, region) pairs for one
// object given attribute evidence, and selection of the grasp pair.

#include "graspkb/error.hpp"
#include "graspkb/grounding.hpp"
#include "graspkb/model_io.hpp"
#include "graspkb/sampler.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace graspkb {

struct QuerySpec {
    std::string object;
    std::string affordance_predicate = "hasAffordance";
    std::string region_predicate = "graspRegion";
    std::optional<std::string> affordance;
    /// Atoms about other objects are ignored.
    World evidence;
    /// Predicates left unobserved for the object (summed out instead of
    /// closed-world false).
    std::vector<std::string> hidden_predicates;
    /// Reject evidence that never names the object (an unknown object).
    bool require_mention = true;
};

/// The ground problem behind a query: one-object universe, clamped evidence
/// and the free atoms.
struct QueryProblem {
    std::shared_ptr<GroundingTable const> table;
    Assignment evidence;
    std::vector<AtomId> free_atoms;
    std::vector<std::string> affordances;
    std::vector<std::string> regions;
    std::vector<AtomId> affordance_atoms;
    std::vector<AtomId> region_atoms;
    /// {affordance atom, region atom}, affordance-major.
    std::vector<std::vector<AtomId>> pair_conjunctions;
};

/// Throws ValidationError when the predicates are missing or not binary over
/// (object, x), the object is absent from the evidence, or evidence names a
/// query or hidden atom.
[[nodiscard]] QueryProblem build_query_problem(Model const& model, QuerySpec const& spec);

struct PairProbability {
    std::string affordance;
    std::string region;
    /// Share of the pair among all pairs; sums to 1 over the list.
    double probability = 0.0;
    /// P(hasAffordance(o, a) ^ graspRegion(o, r)) before normalization.
    double co_truth = 0.0;
};

struct RegionChoice {
    std::string region;
    std::string affordance;
    double probability = 0.0;
};

struct QueryResult {
    std::string object;
    std::string method;
    /// Descending probability, ties by affordance then region name.
    std::vector<PairProbability> pairs;
    std::vector<std::pair<std::string, double>> affordance_marginals;
    std::vector<std::pair<std::string, double>> region_marginals;
    std::pair<std::string, std::string> selected;
    /// Best affordance per region, in region order.
    std::vector<RegionChoice> best_per_region;
    /// No sweep made any pair true; pairs fall back to uniform.
    bool no_pair_mass = false;
    double max_split_rhat = 1.0;
    double max_chain_disagreement = 0.0;
    std::size_t chains = 0;
    std::size_t kept_sweeps = 0;
};

class AffordanceUnavailable : public ValidationError {
  public:
    AffordanceUnavailable(std::string const& affordance, std::vector<std::string> alternatives);

    [[nodiscard]] std::vector<std::string> const& alternatives() const noexcept { return alternatives_; }

  private:
    std::vector<std::string> alternatives_;
};

[[nodiscard]] QueryResult gibbs_query(Model const& model, QuerySpec const& spec, SamplerConfig const& config);

/// Same result computed by exhaustive enumeration (at most 25 free atoms).
[[nodiscard]] QueryResult exact_query(Model const& model, QuerySpec const& spec);

/// Highest-probability pair, restricted to `affordance` when given. Ties go
/// to the lexicographically smaller (affordance, region). Throws
/// AffordanceUnavailable when the affordance has no posterior mass.
[[nodiscard]] std::pair<std::string, std::string> select_grasp(QueryResult const& result,
                                                              std::optional<std::string> const& affordance);

} // namespace graspkb
