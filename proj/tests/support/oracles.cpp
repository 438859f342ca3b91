#include "oracles.hpp"

#include "graspkb/parser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

using graspkb::Formula;
using graspkb::Term;
using graspkb::Universe;

AtomId ground(Universe const& u, graspkb::Atom const& atom, std::vector<std::size_t> const& binding)
{
    std::vector<std::size_t> args;
    for (auto const& t : atom.args) {
        args.push_back(t.kind == Term::Kind::variable ? binding[t.index] : t.index);
    }
    return u.atom_id(atom.predicate, args);
}

// Calls fn(binding) for every assignment of constants to the formula variables.
template <class Fn>
void for_each_binding(Universe const& u, Formula const& f, Fn&& fn)
{
    std::vector<std::size_t> sizes;
    for (auto const& v : f.variables) {
        sizes.push_back(u.domain_size(v.domain));
        if (sizes.back() == 0) {
            return;
        }
    }
    std::vector<std::size_t> binding(f.variables.size(), 0);
    for (;;) {
        fn(binding);
        std::size_t i = binding.size();
        while (i > 0) {
            --i;
            if (++binding[i] < sizes[i]) {
                break;
            }
            binding[i] = 0;
            if (i == 0) {
                return;
            }
        }
        if (binding.empty()) {
            return;
        }
    }
}

} // namespace

std::vector<long> feature_counts(Universe const& u, std::span<Formula const> formulas, Assignment const& x)
{
    std::vector<long> out;
    for (auto const& f : formulas) {
        long count = 0;
        for_each_binding(u, f, [&](std::vector<std::size_t> const& b) {
            bool body = true;
            for (auto const& a : f.body) {
                body = body && x[ground(u, a, b)] != 0;
            }
            bool const head = x[ground(u, f.head, b)] != 0;
            count += (!body || head == f.head_positive) ? 1 : 0;
        });
        out.push_back(count);
    }
    return out;
}

std::vector<long> grounding_counts(Universe const& u, std::span<Formula const> formulas)
{
    std::vector<long> out;
    for (auto const& f : formulas) {
        long n = 1;
        for (auto const& v : f.variables) {
            n *= static_cast<long>(u.domain_size(v.domain));
        }
        out.push_back(n);
    }
    return out;
}

double log_joint(Universe const& u, std::span<Formula const> formulas, std::span<double const> weights,
                 Assignment const& x)
{
    auto const counts = feature_counts(u, formulas, x);
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        s += weights[i] * static_cast<double>(counts[i]);
    }
    return s;
}

Exact enumerate(Universe const& u, std::span<Formula const> formulas, std::span<double const> weights,
                std::span<AtomId const> free, Assignment const& clamped)
{
    auto const states = std::size_t{1} << free.size();
    std::vector<double> energy(states);
    Assignment x = clamped;
    for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t j = 0; j < free.size(); ++j) {
            x[free[j]] = (s >> j) & 1U;
        }
        energy[s] = log_joint(u, formulas, weights, x);
    }
    double const top = *std::max_element(energy.begin(), energy.end());
    long double z = 0.0L;
    std::vector<long double> mass(free.size(), 0.0L);
    for (std::size_t s = 0; s < states; ++s) {
        long double const p = std::exp(static_cast<long double>(energy[s] - top));
        z += p;
        for (std::size_t j = 0; j < free.size(); ++j) {
            if ((s >> j) & 1U) {
                mass[j] += p;
            }
        }
    }
    Exact out;
    out.log_z = top + static_cast<double>(std::log(z));
    for (auto m : mass) {
        out.marginals.push_back(static_cast<double>(m / z));
    }
    return out;
}

double pseudo_log_likelihood(Universe const& u, std::span<Formula const> formulas, std::span<double const> weights,
                             std::span<Assignment const> worlds, double sigma)
{
    double total = 0.0;
    for (auto const& w : worlds) {
        for (AtomId l = 0; l < u.atom_count(); ++l) {
            Assignment on = w;
            Assignment off = w;
            on[l] = 1;
            off[l] = 0;
            double const e1 = log_joint(u, formulas, weights, on);
            double const e0 = log_joint(u, formulas, weights, off);
            double const mine = w[l] ? e1 : e0;
            double const m = std::max(e1, e0);
            total += mine - (m + std::log(std::exp(e1 - m) + std::exp(e0 - m)));
        }
    }
    if (std::isfinite(sigma)) {
        for (double wi : weights) {
            total -= wi * wi / (2.0 * sigma * sigma);
        }
    }
    return total;
}

double directed_hausdorff(std::span<graspkb::Point2 const> a, std::span<graspkb::Point2 const> b)
{
    double worst = 0.0;
    for (auto const& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (auto const& q : b) {
            double const dx = p.x - q.x;
            double const dy = p.y - q.y;
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff(std::span<graspkb::Point2 const> a, std::span<graspkb::Point2 const> b)
{
    return std::max(oracle::directed_hausdorff(a, b), oracle::directed_hausdorff(b, a));
}

std::uint64_t pairwise_twice_u(std::span<graspkb::ScoredLabel const> scored)
{
    std::uint64_t total = 0;
    for (auto const& p : scored) {
        if (!p.positive) {
            continue;
        }
        for (auto const& n : scored) {
            if (n.positive) {
                continue;
            }
            total += p.score > n.score ? 2 : (p.score == n.score ? 1 : 0);
        }
    }
    return total;
}

RandomKb random_kb(graspkb::Rng& rng, std::size_t formulas, double max_abs_weight)
{
    RandomKb kb;
    kb.schema = graspkb::parse_schema("domain object = {}\n"
                                      "domain color = {red, blue}\n"
                                      "domain part = {top, side, base}\n"
                                      "predicate heavy(object)\n"
                                      "predicate hasColor(object, color)\n"
                                      "predicate hasPart(object, part)\n"
                                      "predicate warm(color)\n");
    struct Shape {
        std::string name;
        std::vector<std::string> args;
    };
    // Each argument picks a variable or a constant of its domain.
    auto pick = [&](std::string const& domain) -> std::string {
        if (domain == "object") {
            return "o";
        }
        bool const constant = rng.uniform() < 0.4;
        if (domain == "color") {
            return constant ? (rng.below(2) == 0 ? "red" : "blue") : "c";
        }
        static char const* parts[] = {"top", "side", "base"};
        return constant ? parts[rng.below(3)] : "p";
    };
    std::vector<std::pair<std::string, std::vector<std::string>>> preds = {
        {"heavy", {"object"}}, {"hasColor", {"object", "color"}}, {"hasPart", {"object", "part"}}, {"warm", {"color"}}};
    auto atom = [&]() {
        auto const& [name, domains] = preds[rng.below(preds.size())];
        std::string s = name + "(";
        for (std::size_t i = 0; i < domains.size(); ++i) {
            s += (i ? ", " : "") + pick(domains[i]);
        }
        return s + ")";
    };
    for (std::size_t i = 0; i < formulas; ++i) {
        std::string text;
        auto const body = rng.below(3);
        for (std::size_t b = 0; b < body; ++b) {
            text += (b ? " ^ " : "") + atom();
        }
        if (body > 0) {
            text += " => ";
        }
        if (rng.uniform() < 0.3) {
            text += "!";
        }
        text += atom();
        kb.formulas.push_back(graspkb::parse_formula(text, kb.schema));
        kb.formula_texts.push_back(text);
        kb.weights.push_back(rng.uniform(-max_abs_weight, max_abs_weight));
    }
    return kb;
}

graspkb::Universe random_universe(RandomKb const& kb, std::size_t objects)
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < objects; ++i) {
        names.push_back("o" + std::to_string(i));
    }
    return Universe::with_constants(kb.schema, "object", names);
}

Assignment random_world(graspkb::Rng& rng, std::size_t atoms, double p_true)
{
    Assignment x(atoms);
    for (auto& v : x) {
        v = rng.uniform() < p_true ? 1 : 0;
    }
    return x;
}

} // namespace oracle
