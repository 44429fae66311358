#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/regime_library.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace roms {

struct NoiseSpec {
    double sigma_frac = 0.1;
    int rounds = 400;
    double accuracy_min = 0.95;
    std::uint64_t seed = 0;
    double margin_min = 0.0;  // stage-1 wins must clear this residual gap
};

struct RankedSet {
    IndexSet indices;  // ascending
    double error = 0.0;
    double min_accuracy = 0.0;
    std::map<std::string, double> accuracy;
};

struct BruteResult {
    std::vector<RankedSet> ranked;       // best first
    std::uint64_t candidates_total = 0;  // C(window, k)
    std::uint64_t stage1_survivors = 0;  // classify every state noiselessly
    std::uint64_t retained = 0;          // also pass the noisy accuracy bar
};

inline std::uint64_t combination_count(std::uint64_t n, std::uint64_t k,
                                       std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;  // exact: product of i consecutive ints divides by i!
        if (c > cap) return cap + 1;
    }
    return c;
}

inline constexpr std::uint64_t brute_enumeration_cap = 10'000'000;

// Exhaustive evaluation of every k-subset of the window. Three stages:
// noiseless classification of all validation states, a noisy accuracy bar,
// and a final ranking by mean reconstruction error.
template <typename Scalar>
BruteResult exhaustive_search(const RegimeLibrary<Scalar>& lib, int k,
                              IndexWindow window,
                              const std::vector<LabeledState<Scalar>>& validation,
                              const NoiseSpec& noise) {
    const int n = static_cast<int>(lib.dim());
    if (!window.valid() || window.hi > n)
        throw InvalidInput("exhaustive_search: window outside [1, n]");
    const int w = window.size();
    if (k < 1 || k > w)
        throw InvalidInput("exhaustive_search: k must be in [1, window size]");
    std::uint64_t total = combination_count(static_cast<std::uint64_t>(w),
                                            static_cast<std::uint64_t>(k),
                                            brute_enumeration_cap);
    if (total > brute_enumeration_cap)
        throw GuardError("exhaustive_search: C(" + std::to_string(w) + ", " +
                         std::to_string(k) + ") exceeds the enumeration cap " +
                         std::to_string(brute_enumeration_cap));

    BruteResult out;
    out.candidates_total = total;

    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = window.lo + i;

    while (true) {
        IndexSet idx{combo, n};
        SelectionScore score = evaluate_selection(lib, idx, validation, noise.margin_min);
        if (score.feasible) {
            ++out.stage1_survivors;
            try {
                TrialResult trial = noisy_trials(lib, idx, validation, noise.sigma_frac,
                                                 noise.rounds, noise.seed);
                if (trial.min_accuracy >= noise.accuracy_min) {
                    RankedSet r;
                    r.indices = idx;
                    r.error = score.mean_error;
                    r.min_accuracy = trial.min_accuracy;
                    r.accuracy = std::move(trial.accuracy);
                    out.ranked.push_back(std::move(r));
                }
            } catch (const ClassificationError&) {
                // degenerate samples under this pattern; drop the candidate
            }
        }

        // next combination in lexicographic order
        int i = k - 1;
        while (i >= 0 && combo[static_cast<std::size_t>(i)] == window.hi - (k - 1 - i))
            --i;
        if (i < 0) break;
        ++combo[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }

    std::sort(out.ranked.begin(), out.ranked.end(),
              [](const RankedSet& a, const RankedSet& b) {
                  if (a.error != b.error) return a.error < b.error;
                  return a.indices.values < b.indices.values;
              });
    out.retained = out.ranked.size();
    return out;
}

// Count of retained sets whose j-th smallest index falls on each window
// position. Row j of the result is the histogram for rank slot j; column c
// is window position window.lo + c.
inline std::vector<std::vector<long>> position_histograms(
    const std::vector<RankedSet>& ranked, int k, IndexWindow window) {
    if (!window.valid())
        throw InvalidInput("position_histograms: invalid window");
    std::vector<std::vector<long>> hist(
        static_cast<std::size_t>(k),
        std::vector<long>(static_cast<std::size_t>(window.size()), 0));
    for (const auto& r : ranked) {
        if (r.indices.size() != k)
            throw DimensionError("position_histograms: set size != k");
        std::vector<int> sorted = r.indices.sorted();
        for (int j = 0; j < k; ++j) {
            int pos = sorted[static_cast<std::size_t>(j)] - window.lo;
            if (pos < 0 || pos >= window.size())
                throw InvalidInput("position_histograms: index outside window");
            ++hist[static_cast<std::size_t>(j)][static_cast<std::size_t>(pos)];
        }
    }
    return hist;
}

}  // namespace roms
