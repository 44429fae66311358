#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/pod.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace roms {

// Least-squares fit of library coefficients from a handful of sampled
// entries: minimize ||(P Psi) a - u_samples||_2. The normal-equation objects
// M = (P Psi)^H (P Psi) and f = (P Psi)^H u are kept for diagnostics; the
// solve itself runs on the sampled mode matrix, which is better conditioned.
template <typename Scalar>
struct GappySystem {
    PODBasis<Scalar> library;
    IndexSet index_set;
    Matrix<Scalar> sampled_modes;  // m x r
    Matrix<Scalar> gram;           // r x r
    Index numerical_rank = 0;
    bool rank_deficient = false;

    Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> solver;
};

template <typename Scalar>
GappySystem<Scalar> make_gappy_system(const PODBasis<Scalar>& library,
                                      const IndexSet& idx) {
    if (idx.ambient != library.dim())
        throw DimensionError("make_gappy_system: index ambient != library dimension");
    GappySystem<Scalar> sys;
    sys.library = library;
    sys.index_set = idx;
    sys.sampled_modes = sample_rows(library.modes, idx);
    sys.gram = sys.sampled_modes.adjoint() * sys.sampled_modes;
    sys.solver.compute(sys.sampled_modes);
    sys.numerical_rank = sys.solver.rank();
    sys.rank_deficient = sys.numerical_rank < library.rank();
    return sys;
}

// Minimum-norm least-squares coefficients. Rank deficiency does not throw;
// the system carries a flag for callers that want to warn.
template <typename Scalar>
ReducedState<Scalar> gappy_fit(const GappySystem<Scalar>& sys,
                               const Vector<Scalar>& u_samples) {
    if (u_samples.size() != sys.index_set.size())
        throw DimensionError("gappy_fit: sample count " +
                             std::to_string(u_samples.size()) + " != index count " +
                             std::to_string(sys.index_set.size()));
    return ReducedState<Scalar>{sys.solver.solve(u_samples)};
}

template <typename Scalar>
Vector<Scalar> reconstruct(const GappySystem<Scalar>& sys, const ReducedState<Scalar>& a) {
    return reconstruct(sys.library, a);
}

// Relative L2 mismatch. A zero reference with a nonzero estimate reads as
// infinitely wrong rather than dividing by zero.
template <typename Scalar>
double reconstruction_error(const Vector<Scalar>& u_true, const Vector<Scalar>& u_est) {
    if (u_true.size() != u_est.size())
        throw DimensionError("reconstruction_error: length mismatch");
    double ref = u_true.norm();
    double err = (u_true - u_est).norm();
    if (ref == 0.0)
        return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return err / ref;
}

// Uniform draw of m distinct indices from the window (default: whole axis),
// in draw order. Deterministic for a given seed.
inline IndexSet select_random(int n, int m, IndexWindow window, std::uint64_t seed) {
    if (n < 1)
        throw DimensionError("select_random: n must be >= 1");
    if (!window.valid()) window = {1, n};
    if (window.hi > n)
        throw InvalidInput("select_random: window exceeds dimension");
    const int w = window.size();
    if (m < 1 || m > w)
        throw InvalidInput("select_random: m must be in [1, window size]");
    std::vector<int> pool(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) pool[static_cast<std::size_t>(i)] = window.lo + i;
    std::mt19937_64 rng = rng_stream(seed);
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) {
        std::uniform_int_distribution<int> pick(t, w - 1);
        int j = pick(rng);
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
        chosen.push_back(pool[static_cast<std::size_t>(t)]);
    }
    return make_index_set(std::move(chosen), n);
}

namespace detail {

// Condition of the sampled mode matrix in the pseudo-inverse sense: ratio of
// the largest singular value to the smallest one above the noise floor.
template <typename Derived>
double pseudo_condition(const Eigen::MatrixBase<Derived>& S_expr) {
    Matrix<typename Derived::Scalar> S = S_expr;
    Eigen::JacobiSVD<Matrix<typename Derived::Scalar>> svd(S);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0)
        return std::numeric_limits<double>::infinity();
    double tol = sv[0] * static_cast<double>(std::max(S.rows(), S.cols())) *
                 Eigen::NumTraits<double>::epsilon();
    double smallest = 0.0;
    for (Index i = sv.size() - 1; i >= 0; --i) {
        if (sv[i] > tol) {
            smallest = sv[i];
            break;
        }
    }
    if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
    return sv[0] / smallest;
}

}  // namespace detail

// Greedy point placement minimizing the condition of the sampled system,
// one point at a time. Ties break toward the smaller index.
template <typename Scalar>
IndexSet select_condition_number(const PODBasis<Scalar>& library, int m) {
    const int n = static_cast<int>(library.dim());
    if (m < 1 || m > n)
        throw InvalidInput("select_condition_number: m must be in [1, n]");
    std::vector<int> chosen;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    Matrix<Scalar> S(m, library.rank());
    for (int t = 0; t < m; ++t) {
        double best = std::numeric_limits<double>::infinity();
        int best_i = -1;
        for (int i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            S.row(t) = library.modes.row(i);
            double cond = detail::pseudo_condition(S.topRows(t + 1));
            if (cond < best) {
                best = cond;
                best_i = i;
            }
        }
        if (best_i < 0 || !std::isfinite(best))
            throw NumericalFailure(
                "select_condition_number: no candidate yields a finite condition");
        used[static_cast<std::size_t>(best_i)] = 1;
        chosen.push_back(best_i + 1);
        S.row(t) = library.modes.row(best_i);
    }
    return make_index_set(std::move(chosen), n);
}

// Extrema of the modes, walked in mode order, duplicates skipped. Real modes
// contribute their maximum then minimum; complex modes have no signed
// extrema, so the two largest separated modulus peaks stand in.
template <typename Scalar>
IndexSet select_extrema(const PODBasis<Scalar>& library, int m) {
    const Index n = library.dim();
    if (m < 1 || static_cast<Index>(m) > n)
        throw InvalidInput("select_extrema: m must be in [1, n]");
    std::vector<int> chosen;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    auto take = [&](Index i) {
        if (used[static_cast<std::size_t>(i)]) return;
        used[static_cast<std::size_t>(i)] = 1;
        chosen.push_back(static_cast<int>(i) + 1);
    };
    for (Index j = 0; j < library.rank() && static_cast<int>(chosen.size()) < m; ++j) {
        if constexpr (is_complex_v<Scalar>) {
            Eigen::VectorXd mag = library.modes.col(j).cwiseAbs();
            std::vector<Index> peaks;
            for (Index i = 0; i < n; ++i) {
                bool left_ok = (i == 0) || mag[i] >= mag[i - 1];
                bool right_ok = (i == n - 1) || mag[i] >= mag[i + 1];
                if (left_ok && right_ok) peaks.push_back(i);
            }
            std::stable_sort(peaks.begin(), peaks.end(),
                             [&](Index a, Index b) { return mag[a] > mag[b]; });
            int taken = 0;
            for (Index p : peaks) {
                if (taken == 2 || static_cast<int>(chosen.size()) == m) break;
                if (!used[static_cast<std::size_t>(p)]) {
                    take(p);
                    ++taken;
                }
            }
        } else {
            Index imax = 0, imin = 0;
            library.modes.col(j).maxCoeff(&imax);
            library.modes.col(j).minCoeff(&imin);
            take(imax);
            if (static_cast<int>(chosen.size()) < m) take(imin);
        }
    }
    if (static_cast<int>(chosen.size()) < m)
        throw InvalidInput("select_extrema: modes do not carry " + std::to_string(m) +
                           " distinct extrema");
    return make_index_set(std::move(chosen), static_cast<int>(n));
}

}  // namespace roms
