#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/regime_library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace roms {

struct GAConfig {
    int population = 100;
    int elite = 10;
    int generations = 10;
    double mutation_prob = 0.5;
    int mutation_radius = 3;
    IndexWindow window{};  // unset = whole axis
    std::uint64_t seed = 0;
    double margin_min = 0.0;  // classification win must clear this residual gap
};

inline void validate_ga_config(const GAConfig& cfg, int index_count, int ambient) {
    if (cfg.population < 2)
        throw ConfigError("ga: population must be >= 2");
    if (cfg.elite < 1 || cfg.elite >= cfg.population)
        throw ConfigError("ga: elite must be in [1, population)");
    if (cfg.generations < 0)
        throw ConfigError("ga: generations must be >= 0");
    if (!(cfg.mutation_prob > 0.0) || cfg.mutation_prob > 1.0)
        throw ConfigError("ga: mutation_prob must be in (0, 1]");
    if (cfg.mutation_radius < 1)
        throw ConfigError("ga: mutation_radius must be >= 1");
    if (cfg.window.lo != 0 || cfg.window.hi != 0) {
        if (!cfg.window.valid() || cfg.window.hi > ambient)
            throw ConfigError("ga: index window outside [1, n]");
        if (cfg.window.size() < index_count)
            throw ConfigError("ga: index window smaller than the index count");
    }
}

// Independent per-index shifts. Each index mutates with mutation_prob; the
// shift is uniform on [-radius, radius] without 0, clamped to the window.
// A candidate that lands on another index is redrawn a bounded number of
// times, then left unchanged, so the set stays distinct.
template <typename Rng>
IndexSet mutate(const IndexSet& idx, const GAConfig& cfg, Rng& rng) {
    IndexWindow w = cfg.window;
    if (w.lo == 0 && w.hi == 0) w = {1, idx.ambient};
    std::vector<int> vals = idx.values;
    std::bernoulli_distribution flip(cfg.mutation_prob);
    std::uniform_int_distribution<int> half(1, 2 * cfg.mutation_radius);
    auto taken = [&](int cand) {
        return std::find(vals.begin(), vals.end(), cand) != vals.end();
    };
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!flip(rng)) continue;
        for (int attempt = 0; attempt < 32; ++attempt) {
            int d = half(rng);
            int shift = d <= cfg.mutation_radius ? d - cfg.mutation_radius - 1
                                                 : d - cfg.mutation_radius;
            int cand = std::clamp(vals[i] + shift, w.lo, w.hi);
            if (cand == vals[i]) break;  // clamped back onto itself
            if (!taken(cand)) {
                vals[i] = cand;
                break;
            }
        }
    }
    return make_index_set(std::move(vals), idx.ambient);
}

struct FitnessRecord {
    IndexSet index_set;
    double error = std::numeric_limits<double>::infinity();
    bool feasible = false;
    int generation = 0;
};

template <typename Scalar>
FitnessRecord fitness(const IndexSet& idx, const RegimeLibrary<Scalar>& lib,
                      const std::vector<LabeledState<Scalar>>& validation,
                      int generation = 0, double margin_min = 0.0) {
    SelectionScore score = evaluate_selection(lib, idx, validation, margin_min);
    return FitnessRecord{idx, score.mean_error, score.feasible, generation};
}

// Total order used for ranking: feasible first, then error, then the index
// values. The value tie-break keeps reruns byte-identical.
inline bool fitness_before(const FitnessRecord& a, const FitnessRecord& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.error != b.error) return a.error < b.error;
    return a.index_set.values < b.index_set.values;
}

struct TraceEntry {
    int generation = 0;
    double best_error = 0.0;
    int feasible_count = 0;
};

struct EvolveResult {
    FitnessRecord best;
    std::vector<TraceEntry> trace;
    std::vector<FitnessRecord> final_population;
};

// Mutation-only evolution with elitism. Generation 0 is the start plus
// population-1 mutants of it; later generations keep the elite unchanged and
// refill by mutating uniformly chosen elites. The stream for a child is
// keyed by (seed, generation, slot), so the schedule of draws is fixed no
// matter how evaluation is ordered.
template <typename Scalar>
EvolveResult evolve(const IndexSet& start, const RegimeLibrary<Scalar>& lib,
                    const std::vector<LabeledState<Scalar>>& validation,
                    const GAConfig& cfg) {
    validate_index_set(start);
    validate_ga_config(cfg, start.size(), start.ambient);

    std::vector<FitnessRecord> pop;
    pop.reserve(static_cast<std::size_t>(cfg.population));
    pop.push_back(fitness(start, lib, validation, 0, cfg.margin_min));
    for (int slot = 1; slot < cfg.population; ++slot) {
        std::mt19937_64 rng = rng_stream(cfg.seed, 0, static_cast<std::uint64_t>(slot));
        pop.push_back(fitness(mutate(start, cfg, rng), lib, validation, 0, cfg.margin_min));
    }
    std::sort(pop.begin(), pop.end(), fitness_before);

    EvolveResult out;
    auto record_trace = [&](int gen) {
        int feasible = 0;
        for (const auto& r : pop) feasible += r.feasible ? 1 : 0;
        out.trace.push_back(TraceEntry{gen, pop.front().error, feasible});
    };
    record_trace(0);

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<FitnessRecord> next(pop.begin(), pop.begin() + cfg.elite);
        next.reserve(static_cast<std::size_t>(cfg.population));
        for (int slot = cfg.elite; slot < cfg.population; ++slot) {
            std::mt19937_64 rng =
                rng_stream(cfg.seed, static_cast<std::uint64_t>(gen),
                           static_cast<std::uint64_t>(slot));
            std::uniform_int_distribution<int> pick(0, cfg.elite - 1);
            const IndexSet& parent =
                next[static_cast<std::size_t>(pick(rng))].index_set;
            next.push_back(fitness(mutate(parent, cfg, rng), lib, validation, gen, cfg.margin_min));
        }
        pop = std::move(next);
        std::sort(pop.begin(), pop.end(), fitness_before);
        record_trace(gen);
    }

    out.best = pop.front();
    out.final_population = std::move(pop);
    return out;
}

}  // namespace roms
