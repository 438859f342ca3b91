#pragma once

#include "graspkb/logic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace graspkb {

/// One propositional instance of a formula. Body atoms live in the table's
/// flat atom pool.
struct GroundFormula {
    std::uint32_t formula = 0;
    std::uint32_t body_begin = 0;
    std::uint32_t body_size = 0;
    AtomId head = 0;
    bool head_positive = true;
};

/// All groundings of a formula list over a universe, plus the inverse
/// atom -> grounding adjacency. Immutable once built.
class GroundingTable {
  public:
    static constexpr std::size_t max_groundings = 10'000'000;

    GroundingTable() = default;

    /// Groundings are enumerated per formula in lexicographic order of the
    /// variables' constant indices (first variable most significant).
    /// Throws ValidationError when a used variable has an empty domain or the
    /// total exceeds max_groundings.
    GroundingTable(Universe universe, std::vector<Formula> formulas);

    [[nodiscard]] Universe const& universe() const noexcept { return universe_; }
    [[nodiscard]] std::span<Formula const> formulas() const noexcept { return formulas_; }
    [[nodiscard]] std::size_t formula_count() const noexcept { return formulas_.size(); }
    [[nodiscard]] std::size_t atom_count() const noexcept { return universe_.atom_count(); }

    [[nodiscard]] std::span<GroundFormula const> groundings() const noexcept { return groundings_; }
    [[nodiscard]] std::span<GroundFormula const> groundings_of(std::size_t formula) const;
    [[nodiscard]] std::span<AtomId const> body(GroundFormula const& g) const
    {
        return std::span<AtomId const>(body_pool_).subspan(g.body_begin, g.body_size);
    }

    /// Grounding indices mentioning `atom`, ascending, each listed once.
    [[nodiscard]] std::span<std::uint32_t const> adjacent(AtomId atom) const
    {
        return std::span<std::uint32_t const>(adjacency_).subspan(adjacency_offsets_[atom],
                                                                  adjacency_offsets_[atom + 1] -
                                                                      adjacency_offsets_[atom]);
    }

    /// Implication truth: body not all true, or head value matches polarity.
    [[nodiscard]] bool satisfied(GroundFormula const& g, Assignment const& x) const;

    /// Truth of `g` with `atom` forced to `value`.
    [[nodiscard]] bool satisfied_with(GroundFormula const& g, Assignment const& x, AtomId atom, bool value) const;

  private:
    Universe universe_;
    std::vector<Formula> formulas_;
    std::vector<GroundFormula> groundings_;
    std::vector<std::size_t> formula_offsets_;
    std::vector<AtomId> body_pool_;
    std::vector<std::size_t> adjacency_offsets_;
    std::vector<std::uint32_t> adjacency_;
};

/// Number of satisfied groundings of formula i in world x.
[[nodiscard]] std::size_t feature_count(GroundingTable const& table, std::size_t formula, Assignment const& x);

/// feature_count for every formula.
[[nodiscard]] std::vector<std::int64_t> feature_counts(GroundingTable const& table, Assignment const& x);

/// f_i(x with atom true) - f_i(x with atom false) for every formula i. Only
/// groundings adjacent to the atom are visited.
[[nodiscard]] std::vector<int> delta_counts(GroundingTable const& table, Assignment const& x, AtomId atom);

/// Sparse form of delta_counts: (formula, delta) pairs with nonzero delta,
/// formula ascending. Appends to `out`.
void sparse_delta_counts(GroundingTable const& table, Assignment const& x, AtomId atom,
                         std::vector<std::pair<std::uint32_t, int>>& out);

/// sum_i w_i * delta_counts_i: log-odds of the atom given the rest of x.
[[nodiscard]] double conditional_log_odds(GroundingTable const& table, std::span<double const> weights,
                                          Assignment const& x, AtomId atom);

} // namespace graspkb
