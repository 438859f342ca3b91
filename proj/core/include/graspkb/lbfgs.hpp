#pragma once

// Limited-memory BFGS minimizer with Armijo backtracking.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace graspkb {

struct LbfgsOptions {
    /// Number of (s, y) correction pairs kept.
    std::size_t history = 7;
    std::size_t max_iterations = 200;
    /// Stop once the Euclidean gradient norm is at or below this.
    double gradient_tolerance = 1e-5;
    /// Sufficient-decrease constant c1 in f(x + a d) <= f(x) + c1 a g.d
    double armijo = 1e-4;
    double backtrack = 0.5;
    std::size_t max_backtracks = 60;
};

struct LbfgsResult {
    std::vector<double> x;
    double value = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Objective at the start and after every accepted step; non-increasing.
    std::vector<double> trace;
    std::string message;
};

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(std::span<double const> x, std::span<double> grad)>;

/// Called after each accepted step. May throw to abort the run.
using IterationHook = std::function<void(std::span<double const> x, double value)>;

[[nodiscard]] LbfgsResult minimize_lbfgs(Objective const& objective, std::vector<double> x0,
                                         LbfgsOptions const& options, IterationHook const& hook = {});

} // namespace graspkb
