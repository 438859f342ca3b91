#include "graspkb/grounding.hpp"

#include "graspkb/error.hpp"

#include <algorithm>

namespace graspkb {

GroundingTable::GroundingTable(Universe universe, std::vector<Formula> formulas)
    : universe_(std::move(universe)), formulas_(std::move(formulas))
{
    auto const& schema = universe_.schema();

    std::size_t total = 0;
    for (std::size_t i = 0; i < formulas_.size(); ++i) {
        std::size_t n = 1;
        for (auto const& v : formulas_[i].variables) {
            auto const size = universe_.domain_size(v.domain);
            if (size == 0) {
                throw ValidationError("formula " + std::to_string(i) + " (" + formula_text(schema, formulas_[i]) +
                                      "): variable '" + v.name + "' ranges over empty domain '" +
                                      schema.domain(v.domain).name + "'");
            }
            n *= size;
            if (n > max_groundings) {
                break;
            }
        }
        total += n;
        if (total > max_groundings) {
            throw ValidationError("grounding exceeds " + std::to_string(max_groundings) + " ground formulas");
        }
    }
    groundings_.reserve(total);
    formula_offsets_.reserve(formulas_.size() + 1);

    std::vector<std::size_t> scratch;
    auto resolve = [&](Atom const& atom, std::vector<std::size_t> const& binding) {
        scratch.clear();
        for (auto const& t : atom.args) {
            scratch.push_back(t.kind == Term::Kind::variable ? binding[t.index] : t.index);
        }
        return universe_.atom_id(atom.predicate, scratch);
    };

    for (std::size_t i = 0; i < formulas_.size(); ++i) {
        formula_offsets_.push_back(groundings_.size());
        auto const& f = formulas_[i];
        std::vector<std::size_t> binding(f.variables.size(), 0);
        for (;;) {
            GroundFormula g;
            g.formula = static_cast<std::uint32_t>(i);
            g.body_begin = static_cast<std::uint32_t>(body_pool_.size());
            g.body_size = static_cast<std::uint32_t>(f.body.size());
            for (auto const& b : f.body) {
                body_pool_.push_back(resolve(b, binding));
            }
            g.head = resolve(f.head, binding);
            g.head_positive = f.head_positive;
            groundings_.push_back(g);

            std::size_t k = binding.size();
            bool done = true;
            while (k > 0) {
                --k;
                if (++binding[k] < universe_.domain_size(f.variables[k].domain)) {
                    done = false;
                    break;
                }
                binding[k] = 0;
            }
            if (done) {
                break;
            }
        }
    }
    formula_offsets_.push_back(groundings_.size());

    // Inverse index (CSR), one entry per (atom, grounding) pair.
    auto const atoms = universe_.atom_count();
    std::vector<std::size_t> counts(atoms + 1, 0);
    std::vector<AtomId> mentioned;
    auto collect = [&](GroundFormula const& g) {
        mentioned.assign(body_pool_.begin() + g.body_begin, body_pool_.begin() + g.body_begin + g.body_size);
        mentioned.push_back(g.head);
        std::sort(mentioned.begin(), mentioned.end());
        mentioned.erase(std::unique(mentioned.begin(), mentioned.end()), mentioned.end());
    };
    for (auto const& g : groundings_) {
        collect(g);
        for (auto a : mentioned) {
            ++counts[a + 1];
        }
    }
    adjacency_offsets_.assign(atoms + 1, 0);
    for (std::size_t a = 0; a < atoms; ++a) {
        adjacency_offsets_[a + 1] = adjacency_offsets_[a] + counts[a + 1];
    }
    adjacency_.resize(adjacency_offsets_[atoms]);
    std::vector<std::size_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
    for (std::size_t gi = 0; gi < groundings_.size(); ++gi) {
        collect(groundings_[gi]);
        for (auto a : mentioned) {
            adjacency_[fill[a]++] = static_cast<std::uint32_t>(gi);
        }
    }
}

std::span<GroundFormula const> GroundingTable::groundings_of(std::size_t formula) const
{
    return std::span<GroundFormula const>(groundings_)
        .subspan(formula_offsets_.at(formula), formula_offsets_.at(formula + 1) - formula_offsets_.at(formula));
}

bool GroundingTable::satisfied(GroundFormula const& g, Assignment const& x) const
{
    for (auto b : body(g)) {
        if (x[b] == 0) {
            return true;
        }
    }
    return (x[g.head] != 0) == g.head_positive;
}

bool GroundingTable::satisfied_with(GroundFormula const& g, Assignment const& x, AtomId atom, bool value) const
{
    auto truth = [&](AtomId a) { return a == atom ? value : x[a] != 0; };
    for (auto b : body(g)) {
        if (!truth(b)) {
            return true;
        }
    }
    return truth(g.head) == g.head_positive;
}

std::size_t feature_count(GroundingTable const& table, std::size_t formula, Assignment const& x)
{
    std::size_t n = 0;
    for (auto const& g : table.groundings_of(formula)) {
        n += table.satisfied(g, x) ? 1 : 0;
    }
    return n;
}

std::vector<std::int64_t> feature_counts(GroundingTable const& table, Assignment const& x)
{
    std::vector<std::int64_t> counts(table.formula_count(), 0);
    for (auto const& g : table.groundings()) {
        counts[g.formula] += table.satisfied(g, x) ? 1 : 0;
    }
    return counts;
}

std::vector<int> delta_counts(GroundingTable const& table, Assignment const& x, AtomId atom)
{
    std::vector<int> delta(table.formula_count(), 0);
    auto const all = table.groundings();
    for (auto gi : table.adjacent(atom)) {
        auto const& g = all[gi];
        delta[g.formula] += int(table.satisfied_with(g, x, atom, true)) - int(table.satisfied_with(g, x, atom, false));
    }
    return delta;
}

void sparse_delta_counts(GroundingTable const& table, Assignment const& x, AtomId atom,
                         std::vector<std::pair<std::uint32_t, int>>& out)
{
    auto const all = table.groundings();
    // Adjacent groundings are ascending, so formula ids arrive grouped.
    std::uint32_t current = 0;
    int sum = 0;
    bool open = false;
    for (auto gi : table.adjacent(atom)) {
        auto const& g = all[gi];
        if (open && g.formula != current) {
            if (sum != 0) {
                out.emplace_back(current, sum);
            }
            sum = 0;
        }
        current = g.formula;
        open = true;
        sum += int(table.satisfied_with(g, x, atom, true)) - int(table.satisfied_with(g, x, atom, false));
    }
    if (open && sum != 0) {
        out.emplace_back(current, sum);
    }
}

double conditional_log_odds(GroundingTable const& table, std::span<double const> weights, Assignment const& x,
                            AtomId atom)
{
    auto const all = table.groundings();
    double s = 0.0;
    for (auto gi : table.adjacent(atom)) {
        auto const& g = all[gi];
        int const d =
            int(table.satisfied_with(g, x, atom, true)) - int(table.satisfied_with(g, x, atom, false));
        if (d != 0) {
            s += weights[g.formula] * d;
        }
    }
    return s;
}

} // namespace graspkb
