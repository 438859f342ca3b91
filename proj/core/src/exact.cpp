#include "graspkb/exact.hpp"

#include "graspkb/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace graspkb {

double log_joint(GroundingTable const& table, std::span<double const> weights, Assignment const& x)
{
    auto const counts = feature_counts(table, x);
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        s += weights[i] * static_cast<double>(counts[i]);
    }
    return s;
}

double ExactResult::marginal(AtomId atom) const
{
    for (std::size_t j = 0; j < free_atoms.size(); ++j) {
        if (free_atoms[j] == atom) {
            return marginals[j];
        }
    }
    throw std::out_of_range("atom is not free in this enumeration");
}

void apply_state(std::span<AtomId const> free_atoms, std::uint32_t state, Assignment& x)
{
    for (std::size_t j = 0; j < free_atoms.size(); ++j) {
        x[free_atoms[j]] = static_cast<std::uint8_t>((state >> j) & 1U);
    }
}

namespace {

/// Compensated (Neumaier) running sum.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;

    void add(double v)
    {
        double const t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + c; }
};

/// Walks all 2^k states of the free atoms in Gray-code order while keeping
/// exact integer feature counts, so every state's energy is recomputed
/// from integers without accumulated rounding.
class StateWalker {
  public:
    StateWalker(GroundingTable const& table, std::span<double const> weights, std::span<AtomId const> free_atoms,
                Assignment const& clamped)
        : table_(table), weights_(weights), free_(free_atoms.begin(), free_atoms.end()), x_(clamped)
    {
        if (weights.size() != table.formula_count()) {
            throw ValidationError("weight vector length does not match formula count");
        }
        for (double w : weights) {
            if (!std::isfinite(w)) {
                throw ValidationError("non-finite weight");
            }
        }
        if (clamped.size() != table.atom_count()) {
            throw ValidationError("evidence assignment size does not match the ground-atom count");
        }
        if (free_.size() > max_enumerated_atoms) {
            throw ValidationError("exact enumeration is capped at " + std::to_string(max_enumerated_atoms) +
                                  " free atoms, got " + std::to_string(free_.size()));
        }
        std::vector<AtomId> sorted(free_);
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError("duplicate free atom");
        }
        if (!sorted.empty() && sorted.back() >= table.atom_count()) {
            throw ValidationError("free atom out of range");
        }
        for (auto a : free_) {
            x_[a] = 0;
        }
        std::vector<bool> is_relevant(table.formula_count(), false);
        auto const all = table.groundings();
        for (auto a : free_) {
            for (auto gi : table.adjacent(a)) {
                is_relevant[all[gi].formula] = true;
            }
        }
        counts_ = feature_counts(table, x_);
        for (std::size_t i = 0; i < is_relevant.size(); ++i) {
            if (is_relevant[i]) {
                relevant_.push_back(i);
            } else {
                constant_ += weights[i] * static_cast<double>(counts_[i]);
            }
        }
        base_counts_ = counts_;
        base_x_ = x_;
    }

    [[nodiscard]] std::size_t state_count() const noexcept { return std::size_t{1} << free_.size(); }

    /// Calls fn(state, energy) for every state, Gray-code order.
    template <typename Fn>
    void walk(Fn&& fn)
    {
        counts_ = base_counts_;
        x_ = base_x_;
        std::uint32_t state = 0;
        fn(state, energy());
        auto const n = state_count();
        std::vector<std::pair<std::uint32_t, int>> delta;
        for (std::size_t t = 1; t < n; ++t) {
            auto const bit = static_cast<std::size_t>(std::countr_zero(t));
            auto const atom = free_[bit];
            delta.clear();
            sparse_delta_counts(table_, x_, atom, delta);
            int const sign = x_[atom] == 0 ? 1 : -1;
            for (auto const& [f, d] : delta) {
                counts_[f] += sign * d;
            }
            x_[atom] ^= 1U;
            state ^= (1U << bit);
            fn(state, energy());
        }
    }

  private:
    [[nodiscard]] double energy() const
    {
        double e = constant_;
        for (auto i : relevant_) {
            e += weights_[i] * static_cast<double>(counts_[i]);
        }
        return e;
    }

    GroundingTable const& table_;
    std::span<double const> weights_;
    std::vector<AtomId> free_;
    Assignment x_;
    Assignment base_x_;
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> base_counts_;
    std::vector<std::size_t> relevant_;
    double constant_ = 0.0;
};

} // namespace

ExactResult enumerate(GroundingTable const& table, std::span<double const> weights, std::span<AtomId const> free_atoms,
                      Assignment const& clamped, ExactOptions const& options)
{
    StateWalker walker(table, weights, free_atoms, clamped);
    auto const k = free_atoms.size();
    if (options.keep_joint && k > max_joint_table_atoms) {
        throw ValidationError("joint table is capped at " + std::to_string(max_joint_table_atoms) + " free atoms");
    }

    // Conjunctions reduce to a mask over free atoms, or are impossible when
    // they contain a clamped-false atom.
    std::vector<std::uint32_t> masks;
    std::vector<bool> possible;
    for (auto const& conj : options.conjunctions) {
        std::uint32_t mask = 0;
        bool ok = true;
        for (auto a : conj) {
            auto const it = std::find(free_atoms.begin(), free_atoms.end(), a);
            if (it != free_atoms.end()) {
                mask |= 1U << static_cast<std::uint32_t>(it - free_atoms.begin());
            } else if (a >= clamped.size() || clamped[a] == 0) {
                ok = false;
            }
        }
        masks.push_back(mask);
        possible.push_back(ok);
    }

    double max_energy = -std::numeric_limits<double>::infinity();
    walker.walk([&](std::uint32_t, double e) { max_energy = std::max(max_energy, e); });

    CompensatedSum total;
    std::vector<CompensatedSum> atom_mass(k);
    std::vector<CompensatedSum> conj_mass(masks.size());
    ExactResult result;
    if (options.keep_joint) {
        result.joint.assign(walker.state_count(), 0.0);
    }
    walker.walk([&](std::uint32_t state, double e) {
        double const p = std::exp(e - max_energy);
        total.add(p);
        for (std::size_t j = 0; j < k; ++j) {
            if ((state >> j) & 1U) {
                atom_mass[j].add(p);
            }
        }
        for (std::size_t c = 0; c < masks.size(); ++c) {
            if (possible[c] && (state & masks[c]) == masks[c]) {
                conj_mass[c].add(p);
            }
        }
        if (options.keep_joint) {
            result.joint[state] = p;
        }
    });

    double const z = total.value();
    result.log_z = max_energy + std::log(z);
    result.free_atoms.assign(free_atoms.begin(), free_atoms.end());
    for (auto const& m : atom_mass) {
        result.marginals.push_back(std::clamp(m.value() / z, 0.0, 1.0));
    }
    for (auto const& m : conj_mass) {
        result.conjunction_probabilities.push_back(std::clamp(m.value() / z, 0.0, 1.0));
    }
    for (auto& p : result.joint) {
        p /= z;
    }
    return result;
}

std::vector<std::uint32_t> sample_exact(GroundingTable const& table, std::span<double const> weights,
                                        std::span<AtomId const> free_atoms, Assignment const& clamped,
                                        std::size_t count, Rng& rng)
{
    StateWalker walker(table, weights, free_atoms, clamped);
    double max_energy = -std::numeric_limits<double>::infinity();
    walker.walk([&](std::uint32_t, double e) { max_energy = std::max(max_energy, e); });
    CompensatedSum total;
    walker.walk([&](std::uint32_t, double e) { total.add(std::exp(e - max_energy)); });
    double const z = total.value();

    std::vector<double> targets(count);
    for (auto& t : targets) {
        t = rng.uniform() * z;
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });

    std::vector<std::uint32_t> out(count, 0);
    std::size_t next = 0;
    std::uint32_t last = 0;
    CompensatedSum cumulative;
    walker.walk([&](std::uint32_t state, double e) {
        cumulative.add(std::exp(e - max_energy));
        double const c = cumulative.value();
        while (next < count && targets[order[next]] < c) {
            out[order[next++]] = state;
        }
        last = state;
    });
    // Rounding can leave targets just under z unassigned; they belong to the
    // final state of the walk.
    while (next < count) {
        out[order[next++]] = last;
    }
    return out;
}

} // namespace graspkb
