#include "graspkb/sampler.hpp"

#include "graspkb/error.hpp"
#include "graspkb/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace graspkb {

void SamplerConfig::validate() const
{
    if (chains == 0 || samples == 0) {
        throw ValidationError("sampler needs at least one chain and one kept sweep");
    }
}

namespace {

struct ChainOutput {
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> first_half;
    std::vector<std::uint64_t> conj_counts;
    std::vector<std::uint8_t> trace;
};

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double const e = std::exp(z);
    return e / (1.0 + e);
}

ChainOutput run_chain(GroundingTable const& table, std::span<double const> weights, Assignment x,
                      std::span<AtomId const> free_atoms, std::span<std::vector<AtomId> const> conjunctions,
                      SamplerConfig const& config, std::vector<std::uint8_t> const* initial, bool record,
                      std::uint64_t chain)
{
    Rng rng(derive_seed(config.seed, chain));
    auto const k = free_atoms.size();
    for (std::size_t j = 0; j < k; ++j) {
        x[free_atoms[j]] = initial ? (*initial)[j] : static_cast<std::uint8_t>(rng.next() >> 63);
    }
    ChainOutput out;
    out.counts.assign(k, 0);
    out.first_half.assign(k, 0);
    out.conj_counts.assign(conjunctions.size(), 0);
    if (record) {
        out.trace.reserve(config.samples * k);
    }

    auto const half = config.samples / 2;
    auto const sweeps = config.burn_in + config.samples;
    for (std::size_t s = 0; s < sweeps; ++s) {
        for (auto atom : free_atoms) {
            double const p = sigmoid(conditional_log_odds(table, weights, x, atom));
            x[atom] = rng.uniform() < p ? 1 : 0;
        }
        if (s < config.burn_in) {
            continue;
        }
        std::size_t const kept = s - config.burn_in;
        for (std::size_t j = 0; j < k; ++j) {
            if (x[free_atoms[j]] != 0) {
                ++out.counts[j];
                if (kept < half) {
                    ++out.first_half[j];
                }
            }
        }
        for (std::size_t c = 0; c < conjunctions.size(); ++c) {
            bool all = true;
            for (auto a : conjunctions[c]) {
                if (x[a] == 0) {
                    all = false;
                    break;
                }
            }
            out.conj_counts[c] += all ? 1 : 0;
        }
        if (record) {
            for (auto atom : free_atoms) {
                out.trace.push_back(x[atom]);
            }
        }
    }
    return out;
}

/// Split-R-hat for a binary indicator from per-half success counts.
double split_rhat(std::vector<std::pair<double, double>> const& halves)
{
    // Each entry is (successes, length) of one half-chain.
    auto const m = static_cast<double>(halves.size());
    double const n = halves.front().second;
    if (m < 2.0 || n < 2.0) {
        return 1.0;
    }
    double mean_of_means = 0.0;
    double within = 0.0;
    std::vector<double> means;
    for (auto const& [succ, len] : halves) {
        double const p = succ / len;
        means.push_back(p);
        mean_of_means += p;
        within += p * (1.0 - p) * len / (len - 1.0);
    }
    mean_of_means /= m;
    within /= m;
    double between = 0.0;
    for (double p : means) {
        between += (p - mean_of_means) * (p - mean_of_means);
    }
    between *= n / (m - 1.0);
    if (within <= 0.0) {
        return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    double const var_plus = (n - 1.0) / n * within + between / n;
    return std::sqrt(var_plus / within);
}

} // namespace

GibbsEstimate gibbs_marginals(GroundingTable const& table, std::span<double const> weights,
                              Assignment const& evidence, std::span<AtomId const> free_atoms,
                              std::span<std::vector<AtomId> const> conjunctions, SamplerConfig const& config,
                              GibbsOptions const& options)
{
    config.validate();
    if (free_atoms.empty()) {
        throw ValidationError("query has no free atoms to sample");
    }
    if (weights.size() != table.formula_count()) {
        throw ValidationError("weight vector length does not match formula count");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) {
            throw ValidationError("non-finite weight");
        }
    }
    if (evidence.size() != table.atom_count()) {
        throw ValidationError("evidence assignment size does not match the ground-atom count");
    }
    std::vector<AtomId> sorted(free_atoms.begin(), free_atoms.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= table.atom_count()) {
        throw ValidationError("free atoms must be distinct and in range");
    }
    for (auto const& conj : conjunctions) {
        for (auto a : conj) {
            if (a >= table.atom_count()) {
                throw ValidationError("conjunction atom out of range");
            }
        }
    }
    for (auto const& init : options.initial_states) {
        if (init.size() != free_atoms.size()) {
            throw ValidationError("initial state size does not match free atoms");
        }
    }

    std::vector<ChainOutput> outputs(config.chains);
    {
        std::vector<std::jthread> workers;
        for (std::size_t c = 0; c < config.chains; ++c) {
            auto const* init = c < options.initial_states.size() ? &options.initial_states[c] : nullptr;
            workers.emplace_back([&, c, init] {
                outputs[c] = run_chain(table, weights, evidence, free_atoms, conjunctions, config, init,
                                       options.record_trace, c);
            });
        }
    }

    auto const k = free_atoms.size();
    GibbsEstimate est;
    est.free_atoms.assign(free_atoms.begin(), free_atoms.end());
    est.kept_sweeps = config.chains * config.samples;
    auto const total = static_cast<double>(est.kept_sweeps);
    est.marginals.assign(k, 0.0);
    est.conjunction_probabilities.assign(conjunctions.size(), 0.0);
    std::vector<std::uint64_t> counts(k, 0);
    std::vector<std::uint64_t> conj(conjunctions.size(), 0);
    for (auto const& out : outputs) {
        std::vector<double> chain(k);
        for (std::size_t j = 0; j < k; ++j) {
            counts[j] += out.counts[j];
            chain[j] = static_cast<double>(out.counts[j]) / static_cast<double>(config.samples);
        }
        for (std::size_t c = 0; c < conjunctions.size(); ++c) {
            conj[c] += out.conj_counts[c];
        }
        est.chain_marginals.push_back(std::move(chain));
        est.trace.insert(est.trace.end(), out.trace.begin(), out.trace.end());
    }
    for (std::size_t j = 0; j < k; ++j) {
        est.marginals[j] = static_cast<double>(counts[j]) / total;
    }
    for (std::size_t c = 0; c < conjunctions.size(); ++c) {
        est.conjunction_probabilities[c] = static_cast<double>(conj[c]) / total;
    }

    auto const half = static_cast<double>(config.samples / 2);
    auto const rest = static_cast<double>(config.samples) - half;
    for (std::size_t j = 0; j < k; ++j) {
        if (half >= 2.0) {
            std::vector<std::pair<double, double>> halves;
            for (auto const& out : outputs) {
                auto const first = static_cast<double>(out.first_half[j]);
                halves.emplace_back(first, half);
                halves.emplace_back(static_cast<double>(out.counts[j]) - first, rest);
            }
            // Equal-length halves keep the estimator well defined.
            if (half == rest) {
                est.max_split_rhat = std::max(est.max_split_rhat, split_rhat(halves));
            }
        }
        for (std::size_t a = 0; a < outputs.size(); ++a) {
            for (std::size_t b = a + 1; b < outputs.size(); ++b) {
                est.max_chain_disagreement = std::max(
                    est.max_chain_disagreement, std::abs(est.chain_marginals[a][j] - est.chain_marginals[b][j]));
            }
        }
    }
    return est;
}

} // namespace graspkb
