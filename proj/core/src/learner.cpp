#include "graspkb/learner.hpp"

#include "graspkb/error.hpp"
#include "graspkb/lbfgs.hpp"
#include "graspkb/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace graspkb {

namespace {

double log_sigmoid(double z)
{
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double const e = std::exp(z);
    return e / (1.0 + e);
}

bool has_prior(double sigma) { return std::isfinite(sigma); }

} // namespace

void TrainingConfig::validate() const
{
    if (!(prior_sigma > 0.0)) {
        throw ValidationError("prior sigma must be positive");
    }
    if (max_iterations == 0) {
        throw ValidationError("max iterations must be positive");
    }
    if (!(gradient_tolerance > 0.0 && gradient_tolerance < 1.0)) {
        throw ValidationError("gradient tolerance must lie in (0, 1)");
    }
    if (history == 0) {
        throw ValidationError("history size must be positive");
    }
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
        throw ValidationError("init scale must be finite and non-negative");
    }
    if (!(max_abs_weight > 0.0)) {
        throw ValidationError("max abs weight must be positive");
    }
}

std::vector<TrainingBatch> make_batches(Schema const& schema, std::span<Formula const> formulas,
                                        std::span<World const> worlds)
{
    std::vector<bool> needed(schema.domains().size(), false);
    for (auto const& f : formulas) {
        for (auto const& v : f.variables) {
            needed[v.domain] = true;
        }
    }
    std::map<std::vector<std::size_t>, std::size_t> by_shape;
    std::vector<TrainingBatch> batches;
    std::vector<Formula> const formula_list(formulas.begin(), formulas.end());
    for (auto const& w : worlds) {
        auto universe = Universe::from_worlds(schema, std::span<World const>(&w, 1));
        std::vector<std::size_t> shape;
        bool usable = true;
        for (std::size_t d = 0; d < schema.domains().size(); ++d) {
            if (schema.domain(d).open) {
                shape.push_back(universe.domain_size(d));
                if (needed[d] && universe.domain_size(d) == 0) {
                    usable = false;
                }
            }
        }
        if (!usable) {
            continue;
        }
        auto const it = by_shape.find(shape);
        std::size_t slot = 0;
        if (it == by_shape.end()) {
            slot = batches.size();
            by_shape.emplace(shape, slot);
            auto x = universe.index(w);
            batches.push_back({std::make_shared<GroundingTable const>(std::move(universe), formula_list), {}});
            batches.back().worlds.push_back(std::move(x));
            continue;
        }
        slot = it->second;
        batches[slot].worlds.push_back(universe.index(w));
    }
    return batches;
}

PseudoLikelihood::PseudoLikelihood(std::span<TrainingBatch const> batches, double prior_sigma)
    : prior_sigma_(prior_sigma)
{
    if (!batches.empty()) {
        dimension_ = batches.front().table->formula_count();
    }
    for (auto const& b : batches) {
        if (b.table->formula_count() != dimension_) {
            throw ValidationError("training batches disagree on formula count");
        }
        add(*b.table, b.worlds);
    }
}

PseudoLikelihood::PseudoLikelihood(GroundingTable const& table, std::span<Assignment const> worlds,
                                   double prior_sigma)
    : dimension_(table.formula_count()), prior_sigma_(prior_sigma)
{
    add(table, worlds);
}

void PseudoLikelihood::add(GroundingTable const& table, std::span<Assignment const> worlds)
{
    // Key: observed bit followed by the sparse delta pattern.
    std::map<std::vector<std::int64_t>, std::size_t> index;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        auto const& term = terms_[t];
        std::vector<std::int64_t> key{term.observed ? 1 : 0};
        for (std::uint32_t k = 0; k < term.size; ++k) {
            key.push_back(pool_formula_[term.begin + k]);
            key.push_back(static_cast<std::int64_t>(pool_delta_[term.begin + k]));
        }
        index.emplace(std::move(key), t);
    }

    std::vector<std::pair<std::uint32_t, int>> delta;
    std::vector<std::int64_t> key;
    for (auto const& x : worlds) {
        if (x.size() != table.atom_count()) {
            throw ValidationError("training world does not match the grounding table");
        }
        for (AtomId l = 0; l < table.atom_count(); ++l) {
            delta.clear();
            sparse_delta_counts(table, x, l, delta);
            bool const observed = x[l] != 0;
            key.assign(1, observed ? 1 : 0);
            for (auto const& [f, d] : delta) {
                key.push_back(f);
                key.push_back(d);
            }
            auto const it = index.find(key);
            if (it != index.end()) {
                terms_[it->second].multiplicity += 1.0;
                continue;
            }
            Term term{static_cast<std::uint32_t>(pool_formula_.size()), static_cast<std::uint32_t>(delta.size()),
                      observed, 1.0};
            for (auto const& [f, d] : delta) {
                pool_formula_.push_back(f);
                pool_delta_.push_back(d);
            }
            index.emplace(key, terms_.size());
            terms_.push_back(term);
        }
    }
}

double PseudoLikelihood::value(std::span<double const> weights) const
{
    double total = 0.0;
    for (auto const& t : terms_) {
        double s = 0.0;
        for (std::uint32_t k = 0; k < t.size; ++k) {
            s += weights[pool_formula_[t.begin + k]] * pool_delta_[t.begin + k];
        }
        total += t.multiplicity * log_sigmoid(t.observed ? s : -s);
    }
    if (has_prior(prior_sigma_)) {
        double const inv = 1.0 / (2.0 * prior_sigma_ * prior_sigma_);
        for (double w : weights) {
            total -= w * w * inv;
        }
    }
    return total;
}

double PseudoLikelihood::value_and_gradient(std::span<double const> weights, std::span<double> grad) const
{
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (auto const& t : terms_) {
        double s = 0.0;
        for (std::uint32_t k = 0; k < t.size; ++k) {
            s += weights[pool_formula_[t.begin + k]] * pool_delta_[t.begin + k];
        }
        total += t.multiplicity * log_sigmoid(t.observed ? s : -s);
        // d/dw log P(x_l) = (x_l - sigmoid(s)) * d
        double const residual = t.multiplicity * ((t.observed ? 1.0 : 0.0) - sigmoid(s));
        for (std::uint32_t k = 0; k < t.size; ++k) {
            grad[pool_formula_[t.begin + k]] += residual * pool_delta_[t.begin + k];
        }
    }
    if (has_prior(prior_sigma_)) {
        double const var = prior_sigma_ * prior_sigma_;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            total -= weights[i] * weights[i] / (2.0 * var);
            grad[i] -= weights[i] / var;
        }
    }
    return total;
}

double pseudo_log_likelihood(std::span<double const> weights, GroundingTable const& table,
                             std::span<Assignment const> worlds, double prior_sigma)
{
    return PseudoLikelihood(table, worlds, prior_sigma).value(weights);
}

std::vector<double> pll_gradient(std::span<double const> weights, GroundingTable const& table,
                                 std::span<Assignment const> worlds, double prior_sigma)
{
    std::vector<double> grad(weights.size());
    (void)PseudoLikelihood(table, worlds, prior_sigma).value_and_gradient(weights, grad);
    return grad;
}

LearnedModel fit(std::span<TrainingBatch const> batches, TrainingConfig const& config,
                 std::span<std::optional<double> const> fixed)
{
    config.validate();
    std::size_t world_count = 0;
    for (auto const& b : batches) {
        world_count += b.worlds.size();
    }
    if (batches.empty() || world_count == 0) {
        throw ValidationError("weight learning needs at least one training world");
    }
    auto const& table = *batches.front().table;
    auto const dim = table.formula_count();
    if (!fixed.empty() && fixed.size() != dim) {
        throw ValidationError("fixed-weight list does not match formula count");
    }

    PseudoLikelihood const pll(batches, config.prior_sigma);

    std::vector<double> weights(dim, 0.0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!fixed.empty() && fixed[i]) {
            weights[i] = *fixed[i];
        } else {
            free.push_back(i);
        }
    }
    if (config.init_scale > 0.0) {
        Rng rng(derive_seed(config.seed, 0x1417));
        for (auto i : free) {
            weights[i] = rng.uniform(-config.init_scale, config.init_scale);
        }
    }

    std::vector<double> full = weights;
    std::vector<double> full_grad(dim);
    auto expand = [&](std::span<double const> sub) {
        for (std::size_t k = 0; k < free.size(); ++k) {
            full[free[k]] = sub[k];
        }
    };
    Objective const objective = [&](std::span<double const> sub, std::span<double> grad) {
        expand(sub);
        double const v = pll.value_and_gradient(full, full_grad);
        for (std::size_t k = 0; k < free.size(); ++k) {
            grad[k] = -full_grad[free[k]];
        }
        return -v;
    };

    auto describe = [&](std::size_t i) {
        return "formula " + std::to_string(i) + " (" + formula_text(table.universe().schema(), table.formulas()[i]) +
               ")";
    };
    IterationHook const hook = [&](std::span<double const> sub, double) {
        for (std::size_t k = 0; k < free.size(); ++k) {
            if (!(std::abs(sub[k]) <= config.max_abs_weight)) {
                throw DivergenceError("weight learning diverged: " + describe(free[k]) + " reached weight " +
                                      std::to_string(sub[k]) +
                                      "; the training data separate it, use a finite prior sigma");
            }
        }
    };

    LbfgsOptions options;
    options.history = config.history;
    options.max_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;

    std::vector<double> start;
    for (auto i : free) {
        start.push_back(weights[i]);
    }
    auto const result = minimize_lbfgs(objective, start, options, hook);
    expand(result.x);
    weights = full;

    // Without a prior the objective can be unbounded: if pushing a weight
    // further along its sign still raises the PLL, the optimum lies at
    // infinity.
    if (!has_prior(config.prior_sigma)) {
        double const at = pll.value(weights);
        std::vector<double> probe = weights;
        for (auto i : free) {
            if (weights[i] == 0.0) {
                continue;
            }
            probe[i] = weights[i] + std::copysign(10.0, weights[i]);
            double const further = pll.value(probe);
            probe[i] = weights[i];
            if (further > at) {
                throw DivergenceError("weight learning diverged: " + describe(i) +
                                      " keeps improving toward infinite weight (separable training data); "
                                      "use a finite prior sigma");
            }
        }
    }

    LearnedModel out;
    out.model.schema = table.universe().schema();
    out.model.formulas.assign(table.formulas().begin(), table.formulas().end());
    out.model.weights = weights;
    out.diagnostics.final_pll = -result.value;
    out.diagnostics.iterations = result.iterations;
    out.diagnostics.gradient_norm = result.gradient_norm;
    out.diagnostics.converged = result.converged;
    out.diagnostics.message = result.message;
    for (double v : result.trace) {
        out.diagnostics.pll_trace.push_back(-v);
    }
    return out;
}

LearnedModel fit(GroundingTable const& table, std::span<Assignment const> worlds, TrainingConfig const& config)
{
    // Non-owning alias; the table outlives this call.
    std::shared_ptr<GroundingTable const> alias(std::shared_ptr<GroundingTable const>{}, &table);
    std::vector<TrainingBatch> batches{{alias, {worlds.begin(), worlds.end()}}};
    return fit(batches, config);
}

LearnedModel fit_rules(Schema const& schema, std::span<Rule const> rules, std::span<World const> worlds,
                       TrainingConfig const& config)
{
    std::vector<Formula> formulas;
    std::vector<std::optional<double>> fixed;
    for (auto const& r : rules) {
        formulas.push_back(r.formula);
        fixed.push_back(r.weight);
    }
    auto batches = make_batches(schema, formulas, worlds);
    if (batches.empty()) {
        throw ValidationError("no usable training worlds");
    }
    return fit(batches, config, fixed);
}

} // namespace graspkb
