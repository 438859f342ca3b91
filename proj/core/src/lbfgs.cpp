#include "graspkb/lbfgs.hpp"

#include "graspkb/error.hpp"

#include <cmath>
#include <deque>
#include <numeric>

namespace graspkb {

namespace {

double dot(std::span<double const> a, std::span<double const> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<double const> a) { return std::sqrt(dot(a, a)); }

struct Correction {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

/// Two-loop recursion: returns -H g.
std::vector<double> search_direction(std::deque<Correction> const& memory, std::vector<double> const& g)
{
    std::vector<double> q = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
        auto const& c = memory[k];
        alpha[k] = c.rho * dot(c.s, q);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] -= alpha[k] * c.y[i];
        }
    }
    if (!memory.empty()) {
        auto const& last = memory.back();
        double const gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (auto& v : q) {
            v *= gamma;
        }
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
        auto const& c = memory[k];
        double const beta = c.rho * dot(c.y, q);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] += (alpha[k] - beta) * c.s[i];
        }
    }
    for (auto& v : q) {
        v = -v;
    }
    return q;
}

} // namespace

LbfgsResult minimize_lbfgs(Objective const& objective, std::vector<double> x0, LbfgsOptions const& options,
                           IterationHook const& hook)
{
    LbfgsResult r;
    r.x = std::move(x0);
    auto const n = r.x.size();
    std::vector<double> g(n, 0.0);
    r.value = objective(r.x, g);
    if (!std::isfinite(r.value)) {
        throw NumericError("objective is not finite at the starting point");
    }
    r.gradient_norm = norm(g);
    r.trace.push_back(r.value);
    if (n == 0 || r.gradient_norm <= options.gradient_tolerance) {
        r.converged = true;
        r.message = "gradient tolerance reached";
        return r;
    }

    std::deque<Correction> memory;
    std::vector<double> x_new(n);
    std::vector<double> g_new(n);
    while (r.iterations < options.max_iterations) {
        auto d = search_direction(memory, g);
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            memory.clear();
            d = g;
            for (auto& v : d) {
                v = -v;
            }
            slope = dot(g, d);
        }
        double step = memory.empty() ? std::min(1.0, 1.0 / r.gradient_norm) : 1.0;

        bool accepted = false;
        double f_new = 0.0;
        for (std::size_t b = 0; b <= options.max_backtracks; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                x_new[i] = r.x[i] + step * d[i];
            }
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= r.value + options.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= options.backtrack;
        }
        if (!accepted) {
            if (!memory.empty()) {
                memory.clear();
                continue;
            }
            r.message = "line search failed to make progress";
            return r;
        }

        Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            c.s[i] = x_new[i] - r.x[i];
            c.y[i] = g_new[i] - g[i];
        }
        double const sy = dot(c.s, c.y);
        if (sy > 1e-12 * norm(c.s) * norm(c.y)) {
            c.rho = 1.0 / sy;
            memory.push_back(std::move(c));
            if (memory.size() > options.history) {
                memory.pop_front();
            }
        }

        r.x = x_new;
        g = g_new;
        r.value = f_new;
        r.gradient_norm = norm(g);
        r.trace.push_back(r.value);
        ++r.iterations;
        if (hook) {
            hook(r.x, r.value);
        }
        if (r.gradient_norm <= options.gradient_tolerance) {
            r.converged = true;
            r.message = "gradient tolerance reached";
            return r;
        }
    }
    r.message = "iteration limit reached";
    return r;
}

} // namespace graspkb
