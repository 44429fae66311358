#pragma once

#include "roms/common.hpp"
#include "roms/gappy.hpp"
#include "roms/pod.hpp"
#include "roms/snapshots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace roms {

// Per-regime POD sub-bases plus their column concatenation. Block j of the
// concatenated matrix is the sub-basis of regime_ids[j].
template <typename Scalar>
struct RegimeLibrary {
    std::vector<std::string> regime_ids;
    std::vector<PODBasis<Scalar>> sublibraries;
    Matrix<Scalar> concat;  // n x sum(r_j)

    Index dim() const { return concat.rows(); }
    int regime_count() const { return static_cast<int>(regime_ids.size()); }

    int regime_index(const std::string& id) const {
        for (int k = 0; k < regime_count(); ++k)
            if (regime_ids[static_cast<std::size_t>(k)] == id) return k;
        throw InvalidInput("regime library: unknown regime '" + id + "'");
    }

    const PODBasis<Scalar>& sublibrary(const std::string& id) const {
        return sublibraries[static_cast<std::size_t>(regime_index(id))];
    }
};

template <typename Scalar>
RegimeLibrary<Scalar> build_library(const std::vector<SnapshotSet<Scalar>>& sets,
                                    double energy) {
    if (sets.size() < 2)
        throw InvalidInput("build_library: need at least two regimes");
    RegimeLibrary<Scalar> lib;
    Index n = sets.front().dim();
    Index total = 0;
    for (const auto& s : sets) {
        if (s.regime.empty())
            throw InvalidInput("build_library: snapshot set without a regime label");
        if (s.dim() != n)
            throw DimensionError("build_library: regime '" + s.regime +
                                 "' has dimension " + std::to_string(s.dim()) +
                                 ", expected " + std::to_string(n));
        for (const auto& id : lib.regime_ids)
            if (id == s.regime)
                throw InvalidInput("build_library: duplicate regime '" + s.regime + "'");
        lib.regime_ids.push_back(s.regime);
        lib.sublibraries.push_back(compute_pod(s.data, Truncation::energy(energy)));
        total += lib.sublibraries.back().rank();
    }
    lib.concat.resize(n, total);
    Index col = 0;
    for (const auto& b : lib.sublibraries) {
        lib.concat.middleCols(col, b.rank()) = b.modes;
        col += b.rank();
    }
    return lib;
}

struct ClassificationResult {
    std::string predicted;
    std::map<std::string, double> residuals;  // relative, per regime
    double margin = 0.0;  // runner-up residual minus winner residual
};

// The regime sub-bases restricted to one sample pattern, with the per-regime
// least-squares solvers precomputed. This is the hot object for the noisy
// trial loops and the exhaustive search.
template <typename Scalar>
struct SampledLibrary {
    const RegimeLibrary<Scalar>* library = nullptr;
    IndexSet index_set;
    std::vector<Matrix<Scalar>> sampled;   // m x c_k per regime, c_k <= m-1
    std::vector<Matrix<Scalar>> pinv;      // c_k x m per regime
    std::vector<Matrix<Scalar>> fit_pinv;  // r_k x m, full sub-basis solver

    int regime_count() const { return static_cast<int>(sampled.size()); }

    // Index of the regime with the smallest relative sampled residual.
    // Residuals are written to `residuals`, sized regime_count().
    int classify_samples(const Vector<Scalar>& u_samples,
                         std::vector<double>& residuals) const {
        double ref = u_samples.norm();
        if (!(ref > 0.0))
            throw ClassificationError(
                "classify: sampled vector is zero, relative residual undefined");
        residuals.resize(sampled.size());
        int best = -1;
        double best_res = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < sampled.size(); ++k) {
            Vector<Scalar> a = pinv[k] * u_samples;
            double res = (u_samples - sampled[k] * a).norm() / ref;
            residuals[k] = res;
            if (res < best_res) {
                best_res = res;
                best = static_cast<int>(k);
            }
        }
        if (best < 0 || !std::isfinite(best_res))
            throw ClassificationError("classify: no finite residual");
        return best;
    }
};

template <typename Scalar>
SampledLibrary<Scalar> sample_library(const RegimeLibrary<Scalar>& lib,
                                      const IndexSet& idx) {
    if (idx.ambient != lib.dim())
        throw DimensionError("sample_library: index ambient != library dimension");
    SampledLibrary<Scalar> s;
    s.library = &lib;
    s.index_set = idx;
    s.sampled.reserve(lib.sublibraries.size());
    s.pinv.reserve(lib.sublibraries.size());
    s.fit_pinv.reserve(lib.sublibraries.size());
    for (const auto& b : lib.sublibraries) {
        // A sub-basis with at least as many modes as samples fits any sample
        // vector exactly, which collapses the residual comparison below.
        // Classification therefore sees at most m-1 leading modes per regime;
        // reconstruction keeps the full sub-basis.
        Index used = std::min<Index>(b.rank(),
                                     std::max<Index>(1, static_cast<Index>(idx.size()) - 1));
        Matrix<Scalar> S = sample_rows(Matrix<Scalar>(b.modes.leftCols(used)), idx);
        Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(S);
        s.sampled.push_back(std::move(S));
        s.pinv.push_back(cod.pseudoInverse());
        if (used == b.rank()) {
            s.fit_pinv.push_back(s.pinv.back());
        } else {
            Matrix<Scalar> F = sample_rows(b.modes, idx);
            Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> full(F);
            s.fit_pinv.push_back(full.pseudoInverse());
        }
    }
    return s;
}

template <typename Scalar>
ClassificationResult classify(const RegimeLibrary<Scalar>& lib, const IndexSet& idx,
                              const Vector<Scalar>& u_samples) {
    SampledLibrary<Scalar> s = sample_library(lib, idx);
    std::vector<double> residuals;
    int best = s.classify_samples(u_samples, residuals);
    ClassificationResult out;
    out.predicted = lib.regime_ids[static_cast<std::size_t>(best)];
    double runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        out.residuals[lib.regime_ids[k]] = residuals[k];
        if (static_cast<int>(k) != best) runner_up = std::min(runner_up, residuals[k]);
    }
    out.margin = runner_up - residuals[static_cast<std::size_t>(best)];
    return out;
}

template <typename Scalar>
struct LabeledState {
    std::string regime;
    Vector<Scalar> state;
};

// Noiseless quality of a sample pattern against labeled full states: every
// state must classify into its own regime, and the score is the mean
// relative error of reconstructing each state from its winning sub-basis.
struct SelectionScore {
    bool feasible = false;
    double mean_error = std::numeric_limits<double>::infinity();
};

// A selection is feasible when every validation state classifies into its
// own regime and wins by more than margin_min. The margin requirement exists
// because sample patterns can leave two regimes with all-but-tied residuals;
// such a pattern classifies by rounding luck and is useless in practice, so
// it must not outrank decisively classifying patterns.
template <typename Scalar>
SelectionScore evaluate_selection(const RegimeLibrary<Scalar>& lib, const IndexSet& idx,
                                  const std::vector<LabeledState<Scalar>>& validation,
                                  double margin_min = 0.0) {
    if (validation.empty())
        throw InvalidInput("evaluate_selection: empty validation set");
    SampledLibrary<Scalar> s = sample_library(lib, idx);
    std::vector<double> residuals;
    double total = 0.0;
    for (const auto& v : validation) {
        int truth = lib.regime_index(v.regime);
        Vector<Scalar> samples = sample_entries(v.state, idx);
        int predicted;
        try {
            predicted = s.classify_samples(samples, residuals);
        } catch (const ClassificationError&) {
            return {};
        }
        if (predicted != truth) return {};
        if (margin_min > 0.0) {
            double runner_up = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < residuals.size(); ++k)
                if (static_cast<int>(k) != predicted)
                    runner_up = std::min(runner_up, residuals[k]);
            if (runner_up - residuals[static_cast<std::size_t>(predicted)] <= margin_min)
                return {};
        }
        Vector<Scalar> a = s.fit_pinv[static_cast<std::size_t>(predicted)] * samples;
        Vector<Scalar> rec =
            lib.sublibraries[static_cast<std::size_t>(predicted)].modes * a;
        total += reconstruction_error(v.state, rec);
    }
    return {true, total / static_cast<double>(validation.size())};
}

// Figure-style reconstruction score: every state is reconstructed against
// its own regime's sub-basis, regardless of how it would classify. This is
// the quantity comparison scorecards report, so that a strategy with
// imperfect classification still gets a finite error bar.
template <typename Scalar>
double reconstruction_score(const RegimeLibrary<Scalar>& lib, const IndexSet& idx,
                            const std::vector<LabeledState<Scalar>>& validation) {
    if (validation.empty())
        throw InvalidInput("reconstruction_score: empty validation set");
    SampledLibrary<Scalar> s = sample_library(lib, idx);
    double total = 0.0;
    for (const auto& v : validation) {
        std::size_t truth = static_cast<std::size_t>(lib.regime_index(v.regime));
        Vector<Scalar> samples = sample_entries(v.state, idx);
        Vector<Scalar> a = s.fit_pinv[truth] * samples;
        total += reconstruction_error(v.state,
                                      Vector<Scalar>(lib.sublibraries[truth].modes * a));
    }
    return total / static_cast<double>(validation.size());
}

// Additive white Gaussian noise scaled to the RMS of the sampled values.
// For complex samples the two components carry half the variance each, so
// the expected squared modulus of the noise is sigma^2.
template <typename Scalar>
void add_sample_noise(Vector<Scalar>& samples, double sigma_frac,
                      std::mt19937_64& rng) {
    if (sigma_frac <= 0.0) return;
    double rms = samples.norm() / std::sqrt(static_cast<double>(samples.size()));
    double sigma = sigma_frac * rms;
    std::normal_distribution<double> dist;
    for (Index i = 0; i < samples.size(); ++i) {
        if constexpr (is_complex_v<Scalar>) {
            double s = sigma / std::sqrt(2.0);
            samples[i] += Scalar(s * dist(rng), s * dist(rng));
        } else {
            samples[i] += sigma * dist(rng);
        }
    }
}

struct TrialResult {
    std::map<std::string, double> accuracy;  // per regime
    double min_accuracy = 0.0;
};

// Repeated noisy classification. Round t uses an RNG stream keyed by
// (seed, t), so results do not depend on evaluation order, and each round
// cycles deterministically through the test states of every regime.
template <typename Scalar>
TrialResult noisy_trials(const RegimeLibrary<Scalar>& lib, const IndexSet& idx,
                         const std::vector<LabeledState<Scalar>>& test_states,
                         double noise_sigma_frac, int rounds, std::uint64_t seed) {
    if (rounds < 1)
        throw InvalidInput("noisy_trials: rounds must be >= 1");
    // Noise draws attach to sample positions, so trial outcomes are made
    // independent of the selection's presentation order by canonicalizing it;
    // {a,b,c} and {c,a,b} must earn identical accuracy.
    IndexSet canon = idx;
    std::sort(canon.values.begin(), canon.values.end());
    SampledLibrary<Scalar> s = sample_library(lib, canon);

    // Group test states by regime; each must be known to the library.
    std::vector<std::vector<const Vector<Scalar>*>> groups(
        static_cast<std::size_t>(lib.regime_count()));
    for (const auto& ts : test_states) {
        int k = lib.regime_index(ts.regime);
        groups[static_cast<std::size_t>(k)].push_back(&ts.state);
    }
    for (int k = 0; k < lib.regime_count(); ++k)
        if (groups[static_cast<std::size_t>(k)].empty())
            throw InvalidInput("noisy_trials: no test states for regime '" +
                               lib.regime_ids[static_cast<std::size_t>(k)] + "'");

    std::vector<long> correct(static_cast<std::size_t>(lib.regime_count()), 0);
    std::vector<double> residuals;
    Vector<Scalar> samples;
    for (int t = 0; t < rounds; ++t) {
        std::mt19937_64 rng = rng_stream(seed, static_cast<std::uint64_t>(t));
        for (int k = 0; k < lib.regime_count(); ++k) {
            const auto& group = groups[static_cast<std::size_t>(k)];
            const Vector<Scalar>& u = *group[static_cast<std::size_t>(t) % group.size()];
            samples = sample_entries(u, canon);
            add_sample_noise(samples, noise_sigma_frac, rng);
            if (s.classify_samples(samples, residuals) == k)
                ++correct[static_cast<std::size_t>(k)];
        }
    }

    TrialResult out;
    out.min_accuracy = 1.0;
    for (int k = 0; k < lib.regime_count(); ++k) {
        double acc = static_cast<double>(correct[static_cast<std::size_t>(k)]) / rounds;
        out.accuracy[lib.regime_ids[static_cast<std::size_t>(k)]] = acc;
        out.min_accuracy = std::min(out.min_accuracy, acc);
    }
    return out;
}

}  // namespace roms
