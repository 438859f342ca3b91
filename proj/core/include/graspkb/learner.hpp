#pragma once

// Generative weight learning: maximize the pseudo-log-likelihood of fully
// observed training worlds, with an optional Gaussian prior, by L-BFGS.

#include "graspkb/grounding.hpp"
#include "graspkb/model_io.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graspkb {

struct TrainingConfig {
    /// Standard deviation of the zero-mean Gaussian prior; +inf disables it.
    double prior_sigma = 10.0;
    std::size_t max_iterations = 1000;
    double gradient_tolerance = 1e-5;
    std::size_t history = 7;
    std::uint64_t seed = 0;
    /// Free weights start uniform in [-init_scale, init_scale]; 0 starts at w = 0.
    double init_scale = 0.0;
    /// Any weight beyond this magnitude aborts the run as divergent.
    double max_abs_weight = 50.0;

    /// Throws ValidationError when a field is out of range.
    void validate() const;
};

/// Worlds indexed against one grounding table.
struct TrainingBatch {
    std::shared_ptr<GroundingTable const> table;
    std::vector<Assignment> worlds;
};

/// Groups worlds by the size of their own open-domain constant sets and
/// grounds `formulas` once per group. Each world is indexed against its own
/// constants, so worlds about different objects share one table. Worlds whose
/// open domains are empty while a formula needs them are skipped.
[[nodiscard]] std::vector<TrainingBatch> make_batches(Schema const& schema, std::span<Formula const> formulas,
                                                      std::span<World const> worlds);

/// Precomputed PLL terms. Each (world, atom) contributes
///   log sigmoid(+-(sum_i w_i d_i))
/// where d is the atom's delta_counts in that world; identical
/// (observed value, d) patterns are merged with a multiplicity.
class PseudoLikelihood {
  public:
    PseudoLikelihood(std::span<TrainingBatch const> batches, double prior_sigma);
    PseudoLikelihood(GroundingTable const& table, std::span<Assignment const> worlds, double prior_sigma);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t term_count() const noexcept { return terms_.size(); }

    [[nodiscard]] double value(std::span<double const> weights) const;
    /// Value, with the gradient written into `grad`.
    double value_and_gradient(std::span<double const> weights, std::span<double> grad) const;

  private:
    struct Term {
        std::uint32_t begin;
        std::uint32_t size;
        bool observed;
        double multiplicity;
    };

    void add(GroundingTable const& table, std::span<Assignment const> worlds);

    std::size_t dimension_ = 0;
    double prior_sigma_;
    std::vector<Term> terms_;
    std::vector<std::uint32_t> pool_formula_;
    std::vector<double> pool_delta_;
};

/// Sum over worlds and ground atoms of log P(x_l | rest), minus
/// sum_i w_i^2 / (2 sigma^2).
[[nodiscard]] double pseudo_log_likelihood(std::span<double const> weights, GroundingTable const& table,
                                           std::span<Assignment const> worlds, double prior_sigma);

[[nodiscard]] std::vector<double> pll_gradient(std::span<double const> weights, GroundingTable const& table,
                                               std::span<Assignment const> worlds, double prior_sigma);

struct TrainingDiagnostics {
    double final_pll = 0.0;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    /// PLL at the start and after every accepted step.
    std::vector<double> pll_trace;
    std::string message;
};

struct LearnedModel {
    Model model;
    TrainingDiagnostics diagnostics;
};

/// Maximizes PLL over the formulas whose `fixed` entry is empty (all when
/// `fixed` is empty); fixed formulas keep their weight. Throws
/// DivergenceError when the data drive a weight to infinity (only possible
/// without a prior) and ValidationError on empty input.
[[nodiscard]] LearnedModel fit(std::span<TrainingBatch const> batches, TrainingConfig const& config,
                               std::span<std::optional<double> const> fixed = {});

/// Convenience overload over a single table.
[[nodiscard]] LearnedModel fit(GroundingTable const& table, std::span<Assignment const> worlds,
                               TrainingConfig const& config);

/// Learns from parsed rules and worlds: weighted rules stay fixed.
[[nodiscard]] LearnedModel fit_rules(Schema const& schema, std::span<Rule const> rules,
                                     std::span<World const> worlds, TrainingConfig const& config);

} // namespace graspkb
