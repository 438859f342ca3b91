#pragma once

// Brute-force enumeration over a set of free ground atoms with every other
// atom clamped. Serves as the correctness oracle for sampling and learning
// and as an exact sampler for small models.

#include "graspkb/grounding.hpp"
#include "graspkb/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace graspkb {

inline constexpr std::size_t max_enumerated_atoms = 25;
inline constexpr std::size_t max_joint_table_atoms = 20;

/// sum_i w_i f_i(x): the unnormalized log probability of x.
[[nodiscard]] double log_joint(GroundingTable const& table, std::span<double const> weights, Assignment const& x);

struct ExactOptions {
    /// Store the full joint over free atoms (requires <= 20 free atoms).
    bool keep_joint = false;
    /// Each entry is a set of atoms; its probability of being all true is
    /// reported in ExactResult::conjunction_probabilities.
    std::vector<std::vector<AtomId>> conjunctions;
};

struct ExactResult {
    /// log of sum over free-atom states of exp(log_joint).
    double log_z = 0.0;
    std::vector<AtomId> free_atoms;
    /// P(atom true), aligned with free_atoms.
    std::vector<double> marginals;
    std::vector<double> conjunction_probabilities;
    /// Probability per state; bit j of the index is the value of free_atoms[j].
    std::vector<double> joint;

    /// Marginal of a free atom; throws std::out_of_range for clamped atoms.
    [[nodiscard]] double marginal(AtomId atom) const;
};

/// Exact marginals with `clamped` supplying every non-free atom.
/// Throws ValidationError past max_enumerated_atoms, on duplicate or
/// out-of-range free atoms, or on non-finite weights.
[[nodiscard]] ExactResult enumerate(GroundingTable const& table, std::span<double const> weights,
                                    std::span<AtomId const> free_atoms, Assignment const& clamped,
                                    ExactOptions const& options = {});

/// Independent exact draws from the conditional over free atoms, by
/// inverse-CDF over the enumerated states. Bit j of each returned state is
/// the value of free_atoms[j].
[[nodiscard]] std::vector<std::uint32_t> sample_exact(GroundingTable const& table, std::span<double const> weights,
                                                      std::span<AtomId const> free_atoms, Assignment const& clamped,
                                                      std::size_t count, Rng& rng);

/// Writes a sampled state into x.
void apply_state(std::span<AtomId const> free_atoms, std::uint32_t state, Assignment& x);

} // namespace graspkb
