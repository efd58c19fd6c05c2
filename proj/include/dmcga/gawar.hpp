#pragma once

/// @file gawar.hpp
/// Genetic algorithm with adaptive rates over fixed-size feature subsets.
///
/// Each iteration produces n_c offspring by single-point crossover between
/// roulette-selected parents and n_m mutants by single-gene replacement, then
/// keeps the n_pop fittest of parents, offspring and mutants. Every
/// `adapt_period` iterations without improvement the crossover rate drops by
/// 0.2 (floored at 0.3) and the mutation rate rises by 0.2; once the mutation
/// rate would pass 1 crossover is switched off and each iteration produces
/// n_pop mutants. Any improvement restores the initial rates. The run stops
/// after `max_iters` iterations or `stagnation_limit` consecutive iterations
/// without improvement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dmcga/errors.hpp"
#include "dmcga/feature_space.hpp"
#include "dmcga/random.hpp"

namespace dmcga {

using Genes = std::vector<std::size_t>;

struct Individual {
    Genes genes;
    std::optional<double> fitness;
    std::uint64_t serial = 0;  // creation order, breaks fitness ties
};

struct RateState {
    double p_c = 0.9;
    double p_m = 0.4;
    std::size_t tag = 1;
    std::size_t a_tag = 1;
    bool crossover_active = true;
};

struct RateSchedule {
    double initial_p_c = 0.9;
    double initial_p_m = 0.4;
    double step = 0.2;
    double p_c_floor = 0.3;
    std::size_t adapt_period = 5;
};

struct OperatorCounts {
    std::size_t n_c = 0;
    std::size_t n_m = 0;
};

struct RateUpdate {
    RateState state;
    OperatorCounts counts;
    bool adapted = false;  // the rate pair changed because of stagnation
};

struct GaConfig {
    std::size_t n_pop = 20;
    std::size_t max_iters = 150;
    std::size_t stagnation_limit = 30;
    std::size_t adapt_period = 5;
    std::size_t n_var = 10;
    std::uint64_t seed = 0;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double best_fitness = 0.0;
    double p_c = 0.0;
    double p_m = 0.0;
    std::size_t n_c = 0;
    std::size_t n_m = 0;
    bool adapted = false;        // first iteration running on freshly adapted rates
    bool full_mutation = false;  // crossover switched off
    std::size_t nfe_cumulative = 0;
};

enum class StopReason { MaxIterations, Stagnation, SingleSubset };

struct ConvergenceLog {
    double initial_best = 0.0;
    std::vector<IterationRecord> records;
    std::size_t nfe = 0;
    // n_pop + sum over iterations of (n_c + n_m): the evaluation count with no cache hits
    std::size_t evaluation_budget = 0;
    StopReason stop_reason = StopReason::MaxIterations;
};

struct GaResult {
    Individual best;
    ConvergenceLog log;
};

namespace detail {
// Rates live on a 0.1 grid; snapping keeps 0.9 - 0.2 equal to the literal 0.7.
inline double snap_rate(double x) { return std::round(x * 1e6) / 1e6; }
inline std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }
}  // namespace detail

/// n_c = 2 * ceil(p_c * n_pop / 2), n_m = ceil(p_m * n_pop); with crossover
/// off, n_c = 0 and n_m = n_pop.
inline OperatorCounts operator_counts(const RateState& state, std::size_t n_pop) {
    if (!state.crossover_active) return {0, n_pop};
    const double pop = static_cast<double>(n_pop);
    return {2 * detail::ceil_count(state.p_c * pop / 2.0), detail::ceil_count(state.p_m * pop)};
}

inline RateState initial_rate_state(const RateSchedule& schedule = {}) {
    return {schedule.initial_p_c, schedule.initial_p_m, 1, 1, true};
}

/// One step of the rate controller, run at the end of each iteration.
inline RateUpdate adapt_rates(RateState state, bool improved, std::size_t n_pop, const RateSchedule& schedule = {}) {
    RateUpdate out;
    if (improved) {
        out.state = initial_rate_state(schedule);
        out.counts = operator_counts(out.state, n_pop);
        return out;
    }
    ++state.tag;
    ++state.a_tag;
    if (state.a_tag > schedule.adapt_period) {
        const RateState before = state;
        state.a_tag = 1;
        state.p_c = std::max(detail::snap_rate(state.p_c - schedule.step), schedule.p_c_floor);
        state.p_m = detail::snap_rate(state.p_m + schedule.step);
        if (state.p_m > 1.0) {
            state.p_c = 0.0;
            state.p_m = 1.0;
            state.crossover_active = false;
        }
        out.adapted = before.p_c != state.p_c || before.p_m != state.p_m ||
                      before.crossover_active != state.crossover_active;
    }
    out.state = state;
    out.counts = operator_counts(state, n_pop);
    return out;
}

/// Roulette wheel: smallest i with u <= W_i, W the cumulative fitness share.
/// A zero total falls back to uniform selection.
inline std::size_t roulette_select(std::span<const double> fitnesses, double u) {
    if (fitnesses.empty()) throw ArgumentError("roulette over an empty population");
    double total = 0.0;
    for (double f : fitnesses) {
        if (f < 0.0) throw ArgumentError("roulette needs non-negative fitness");
        total += f;
    }
    const std::size_t n = fitnesses.size();
    if (total <= 0.0) return std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += fitnesses[i] / total;
        if (u <= cumulative) return i;
    }
    return n - 1;  // rounding left W_n a hair below 1
}

namespace detail {

inline bool contains(std::span<const std::size_t> genes, std::size_t g) {
    return std::find(genes.begin(), genes.end(), g) != genes.end();
}

// Replaces any gene already seen at an earlier position with a uniform draw
// from the space members not in the subset.
inline void repair_duplicates(Genes& genes, std::span<const std::size_t> space, Rng& rng) {
    for (std::size_t i = 1; i < genes.size(); ++i) {
        if (!contains(std::span(genes).first(i), genes[i])) continue;
        std::vector<std::size_t> unused;
        for (std::size_t g : space)
            if (!contains(genes, g)) unused.push_back(g);
        if (unused.empty()) throw ExhaustedSpace();
        genes[i] = unused[uniform_index(rng, unused.size())];
    }
}

}  // namespace detail

/// Single-point crossover at `cut` (1 <= cut < length), then duplicate repair
/// of the first and then the second child.
inline std::pair<Genes, Genes> crossover(std::span<const std::size_t> p1, std::span<const std::size_t> p2,
                                         std::size_t cut, std::span<const std::size_t> space, Rng& rng) {
    if (p1.size() != p2.size()) throw ArgumentError("crossover parents differ in length");
    if (cut < 1 || cut >= p1.size()) throw ArgumentError("crossover cut must lie in [1, length - 1]");
    Genes o1(p1.begin(), p1.begin() + cut);
    o1.insert(o1.end(), p2.begin() + cut, p2.end());
    Genes o2(p2.begin(), p2.begin() + cut);
    o2.insert(o2.end(), p1.begin() + cut, p1.end());
    detail::repair_duplicates(o1, space, rng);
    detail::repair_duplicates(o2, space, rng);
    return {std::move(o1), std::move(o2)};
}

/// Candidates for mutation: space members not already in `genes`, in space order.
inline std::vector<std::size_t> mutation_pool(std::span<const std::size_t> genes, std::span<const std::size_t> space) {
    std::vector<std::size_t> seq;
    for (std::size_t g : space)
        if (!detail::contains(genes, g)) seq.push_back(g);
    return seq;
}

/// Replaces position `position` with `replacement`.
inline Genes mutate_with(std::span<const std::size_t> genes, std::size_t replacement, std::size_t position) {
    if (position >= genes.size()) throw IndexOutOfRange("mutation position out of range");
    if (detail::contains(genes, replacement)) throw ArgumentError("replacement gene already present");
    Genes y(genes.begin(), genes.end());
    y[position] = replacement;
    return y;
}

/// Draws the replacement, then the position.
inline Genes mutate(std::span<const std::size_t> genes, std::span<const std::size_t> space, Rng& rng) {
    const auto seq = mutation_pool(genes, space);
    if (seq.empty()) throw ExhaustedSpace();
    const std::size_t replacement = seq[uniform_index(rng, seq.size())];
    const std::size_t position = uniform_index(rng, genes.size());
    return mutate_with(genes, replacement, position);
}

inline Genes random_subset(std::span<const std::size_t> space, std::size_t n_var, Rng& rng) {
    if (n_var > space.size()) throw ArgumentError("subset larger than feature space");
    return sample_without_replacement(space, n_var, rng);
}

/// Exact binomial coefficient; throws if the result exceeds 64 bits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;  // exact: a product of i consecutive integers is divisible by i!
        if (result > static_cast<unsigned __int128>(UINT64_MAX)) throw ArgumentError("binomial overflows 64 bits");
    }
    return static_cast<std::uint64_t>(result);
}

/// Memoizes fitness by the sorted gene set; misses are the NFE.
template <class Fitness>
class FitnessCache {
public:
    explicit FitnessCache(Fitness& fitness) : fitness_(fitness) {}

    double operator()(const Genes& genes) {
        Genes key = genes;
        std::sort(key.begin(), key.end());
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const double value = fitness_(std::span<const std::size_t>(genes));
        cache_.emplace(std::move(key), value);
        return value;
    }

    std::size_t misses() const noexcept { return cache_.size(); }

private:
    Fitness& fitness_;
    std::map<Genes, double> cache_;
};

/// Called after survivor selection with the new population and the record
/// just logged.
using IterationObserver = std::function<void(std::span<const Individual>, const IterationRecord&)>;

/// Runs the GA. `fitness` maps a gene span to a non-negative score to maximize.
/// Random draws come from one stream seeded by config.seed, consumed in a
/// fixed order: initial population, then per iteration crossover (u1, u2,
/// cut, repairs) pair by pair, then mutation (parent, replacement, position).
template <class Fitness>
GaResult run_gawar(const FeatureSpace& space, const GaConfig& config, Fitness&& fitness,
                   const IterationObserver& observer = {}) {
    if (config.n_pop < 2) throw ArgumentError("population size must be at least 2");
    if (config.n_var < 1 || config.n_var > space.size())
        throw ArgumentError("subset length must lie in [1, feature space size]");
    if (config.adapt_period < 1) throw ArgumentError("adapt period must be at least 1");

    const std::span<const std::size_t> pool(space.indices);
    Rng rng = make_rng(config.seed);
    FitnessCache cache(fitness);
    std::uint64_t serial = 0;
    auto make = [&](Genes genes) {
        Individual ind{std::move(genes), std::nullopt, serial++};
        ind.fitness = cache(ind.genes);
        return ind;
    };
    auto fitter = [](const Individual& a, const Individual& b) {
        return *a.fitness != *b.fitness ? *a.fitness > *b.fitness : a.serial < b.serial;
    };

    std::vector<Individual> population;
    population.reserve(config.n_pop);
    for (std::size_t i = 0; i < config.n_pop; ++i) population.push_back(make(random_subset(pool, config.n_var, rng)));
    std::sort(population.begin(), population.end(), fitter);

    GaResult result;
    result.best = population.front();
    result.log.initial_best = *result.best.fitness;
    result.log.evaluation_budget = config.n_pop;

    if (config.n_var == space.size()) {
        // only one subset exists; nothing to search
        result.log.nfe = cache.misses();
        result.log.stop_reason = StopReason::SingleSubset;
        return result;
    }

    const RateSchedule schedule{0.9, 0.4, 0.2, 0.3, config.adapt_period};
    RateState state = initial_rate_state(schedule);
    OperatorCounts counts = operator_counts(state, config.n_pop);
    bool fresh_adaptation = false;

    for (std::size_t it = 1; it <= config.max_iters; ++it) {
        std::vector<double> fits;
        fits.reserve(population.size());
        for (const auto& ind : population) fits.push_back(*ind.fitness);

        std::vector<Individual> pool_next = population;
        const std::size_t pairs = config.n_var >= 2 ? counts.n_c / 2 : 0;
        for (std::size_t k = 0; k < pairs; ++k) {
            const std::size_t a = roulette_select(fits, uniform_unit(rng));
            const std::size_t b = roulette_select(fits, uniform_unit(rng));
            const std::size_t cut = 1 + uniform_index(rng, config.n_var - 1);
            auto [o1, o2] = crossover(population[a].genes, population[b].genes, cut, pool, rng);
            pool_next.push_back(make(std::move(o1)));
            pool_next.push_back(make(std::move(o2)));
        }
        for (std::size_t k = 0; k < counts.n_m; ++k) {
            const auto& parent = population[uniform_index(rng, population.size())];
            pool_next.push_back(make(mutate(parent.genes, pool, rng)));
        }

        std::stable_sort(pool_next.begin(), pool_next.end(), fitter);
        pool_next.resize(config.n_pop);
        population = std::move(pool_next);

        const bool improved = *population.front().fitness > *result.best.fitness;
        if (improved) result.best = population.front();

        IterationRecord rec;
        rec.iteration = it;
        rec.best_fitness = *result.best.fitness;
        rec.p_c = state.p_c;
        rec.p_m = state.p_m;
        rec.n_c = 2 * pairs;
        rec.n_m = counts.n_m;
        rec.adapted = fresh_adaptation;
        rec.full_mutation = !state.crossover_active;
        rec.nfe_cumulative = cache.misses();
        result.log.records.push_back(rec);
        result.log.evaluation_budget += rec.n_c + rec.n_m;
        if (observer) observer(population, rec);

        const RateUpdate update = adapt_rates(state, improved, config.n_pop, schedule);
        state = update.state;
        counts = update.counts;
        fresh_adaptation = update.adapted;

        if (state.tag > config.stagnation_limit) {
            result.log.stop_reason = StopReason::Stagnation;
            break;
        }
    }
    result.log.nfe = cache.misses();
    return result;
}

/// Mean fitness of `draws` uniformly random subsets.
template <class Fitness>
double random_subset_mean(const FeatureSpace& space, std::size_t n_var, std::size_t draws, std::uint64_t seed,
                          Fitness&& fitness) {
    if (draws == 0) throw ArgumentError("need at least one draw");
    Rng rng = make_rng(seed);
    double sum = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
        const Genes genes = random_subset(space.indices, n_var, rng);
        sum += fitness(std::span<const std::size_t>(genes));
    }
    return sum / static_cast<double>(draws);
}

}  // namespace dmcga
