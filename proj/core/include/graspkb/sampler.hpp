#pragma once

// Gibbs sampling over free ground atoms with evidence clamped.

#include "graspkb/grounding.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace graspkb {

struct SamplerConfig {
    std::size_t chains = 3;
    std::size_t burn_in = 1000;
    /// Kept sweeps per chain.
    std::size_t samples = 10000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GibbsOptions {
    /// Optional starting state per chain (one byte per free atom); chains
    /// without one start uniformly at random.
    std::vector<std::vector<std::uint8_t>> initial_states;
    /// Keep every kept sweep's free-atom state (chain-major).
    bool record_trace = false;
};

struct GibbsEstimate {
    std::vector<AtomId> free_atoms;
    /// Pooled over chains, aligned with free_atoms.
    std::vector<double> marginals;
    /// Fraction of kept sweeps in which every atom of the conjunction is true.
    std::vector<double> conjunction_probabilities;
    std::vector<std::vector<double>> chain_marginals;
    /// Largest split-R-hat over free atoms (1 when chains agree).
    double max_split_rhat = 1.0;
    /// Largest absolute difference between two chains' marginals.
    double max_chain_disagreement = 0.0;
    std::size_t kept_sweeps = 0;
    /// chains * samples rows of free_atoms.size() bytes when recorded.
    std::vector<std::uint8_t> trace;
};

/// Each sweep visits the free atoms in order and redraws each from
/// sigmoid(sum_i w_i * delta_counts_i). Chains run on separate threads with
/// seeds derived from (seed, chain); pooling is in chain order, so results
/// do not depend on scheduling. Throws ValidationError when there are no
/// free atoms, weights are non-finite, or sizes disagree.
[[nodiscard]] GibbsEstimate gibbs_marginals(GroundingTable const& table, std::span<double const> weights,
                                            Assignment const& evidence, std::span<AtomId const> free_atoms,
                                            std::span<std::vector<AtomId> const> conjunctions,
                                            SamplerConfig const& config, GibbsOptions const& options = {});

} // namespace graspkb
