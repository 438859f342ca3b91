#pragma once

// Reference implementations used to check the library. They share only the
// data types and the atom index with it: grounding, counting and summation
// are written out directly.

#include "graspkb/logic.hpp"
#include "graspkb/metrics.hpp"
#include "graspkb/random.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oracle {

using graspkb::Assignment;
using graspkb::AtomId;

/// Satisfied-grounding count per formula, by nested enumeration of the
/// formula's variables.
std::vector<long> feature_counts(graspkb::Universe const& u, std::span<graspkb::Formula const> formulas,
                                 Assignment const& x);

/// Number of groundings per formula (product of variable domain sizes).
std::vector<long> grounding_counts(graspkb::Universe const& u, std::span<graspkb::Formula const> formulas);

double log_joint(graspkb::Universe const& u, std::span<graspkb::Formula const> formulas,
                 std::span<double const> weights, Assignment const& x);

struct Exact {
    double log_z = 0.0;
    std::vector<double> marginals;
};

/// Direct sum over all 2^k states of the free atoms.
Exact enumerate(graspkb::Universe const& u, std::span<graspkb::Formula const> formulas,
                std::span<double const> weights, std::span<AtomId const> free, Assignment const& clamped);

/// Each conditional from two complete feature-count passes.
double pseudo_log_likelihood(graspkb::Universe const& u, std::span<graspkb::Formula const> formulas,
                             std::span<double const> weights, std::span<Assignment const> worlds, double sigma);

/// All-pairs Hausdorff distance on squared Euclidean distance.
double directed_hausdorff(std::span<graspkb::Point2 const> a, std::span<graspkb::Point2 const> b);
double hausdorff(std::span<graspkb::Point2 const> a, std::span<graspkb::Point2 const> b);

/// 2 * (pairs with positive above negative) + ties, counted over all pairs.
std::uint64_t pairwise_twice_u(std::span<graspkb::ScoredLabel const> scored);

/// Small random knowledge base over one open object domain and a few closed
/// domains. Formulas have 0-2 body atoms and random head polarity.
struct RandomKb {
    graspkb::Schema schema;
    std::vector<graspkb::Formula> formulas;
    std::vector<double> weights;
    std::vector<std::string> formula_texts;
};

RandomKb random_kb(graspkb::Rng& rng, std::size_t formulas, double max_abs_weight);

/// Universe of `kb` with objects o0..o{n-1}.
graspkb::Universe random_universe(RandomKb const& kb, std::size_t objects);

Assignment random_world(graspkb::Rng& rng, std::size_t atoms, double p_true = 0.5);

} // namespace oracle
