#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/pod.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

namespace roms {

namespace detail {

// Index of the largest-modulus entry; first occurrence wins ties.
template <typename Scalar>
Index argmax_abs(const Vector<Scalar>& v) {
    Index best = 0;
    RealOf<Scalar> best_val = std::abs(v[0]);
    for (Index i = 1; i < v.size(); ++i) {
        RealOf<Scalar> a = std::abs(v[i]);
        if (a > best_val) {
            best_val = a;
            best = i;
        }
    }
    return best;
}

template <typename Scalar>
double spectral_condition(const Matrix<Scalar>& A) {
    Eigen::JacobiSVD<Matrix<Scalar>> svd(A);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] <= 0.0) return std::numeric_limits<double>::infinity();
    return sv[0] / sv[sv.size() - 1];
}

}  // namespace detail

// Greedy interpolation-point selection. Column j of Xi is matched at the
// points chosen so far; the next point is the largest-modulus entry of the
// mismatch. Works on any column set, orthonormal or not.
template <typename Scalar>
IndexSet deim_indices(const Matrix<Scalar>& Xi, int m) {
    const Index n = Xi.rows();
    const Index cols = Xi.cols();
    if (n < 1 || cols < 1)
        throw InvalidInput("deim_indices: empty basis");
    if (m < 1 || m > cols)
        throw InvalidInput("deim_indices: m must be in [1, cols]");
    if (static_cast<Index>(m) > n)
        throw InvalidInput("deim_indices: m exceeds state dimension");

    std::vector<int> gamma;
    gamma.reserve(static_cast<std::size_t>(m));

    Vector<Scalar> xi1 = Xi.col(0);
    if (xi1.norm() == 0.0)
        throw DegenerateInput("deim_indices: first basis column is zero");
    gamma.push_back(static_cast<int>(detail::argmax_abs(xi1)) + 1);

    for (int j = 2; j <= m; ++j) {
        Matrix<Scalar> A(j - 1, j - 1);
        Vector<Scalar> rhs(j - 1);
        for (int i = 0; i < j - 1; ++i) {
            A.row(i) = Xi.block(gamma[static_cast<std::size_t>(i)] - 1, 0, 1, j - 1);
            rhs[i] = Xi(gamma[static_cast<std::size_t>(i)] - 1, j - 1);
        }
        Eigen::FullPivLU<Matrix<Scalar>> lu(A);
        if (lu.rank() < j - 1)
            throw RankDeficiencyError(
                "deim_indices: singular interpolation system at step " +
                    std::to_string(j),
                j);
        Vector<Scalar> c = lu.solve(rhs);
        Vector<Scalar> r = Xi.col(j - 1) - Xi.leftCols(j - 1) * c;
        if (r.norm() == 0.0)
            throw RankDeficiencyError(
                "deim_indices: column " + std::to_string(j) +
                    " is reproduced exactly, no residual to select from",
                j);
        gamma.push_back(static_cast<int>(detail::argmax_abs(r)) + 1);
    }
    return make_index_set(std::move(gamma), static_cast<int>(n));
}

template <typename Scalar>
IndexSet deim_indices(const PODBasis<Scalar>& basis, int m) {
    return deim_indices(basis.modes, m);
}

// Runs the greedy loop for m+k points and drops the first k. Used to skip
// early picks that sit at degenerate locations.
template <typename Scalar>
IndexSet deim_plus_k(const Matrix<Scalar>& Xi, int m, int k) {
    if (k < 0)
        throw InvalidInput("deim_plus_k: k must be >= 0");
    if (static_cast<Index>(m + k) > Xi.cols())
        throw InvalidInput("deim_plus_k: basis has fewer than m+k columns");
    IndexSet full = deim_indices(Xi, m + k);
    std::vector<int> tail(full.values.begin() + k, full.values.end());
    return make_index_set(std::move(tail), full.ambient);
}

template <typename Scalar>
IndexSet deim_plus_k(const PODBasis<Scalar>& basis, int m, int k) {
    return deim_plus_k(basis.modes, m, k);
}

// Oblique projector Xi (P^T Xi)^{-1} P^T applied through `factor`; maps the
// m sampled values of a field to its full reconstruction.
template <typename Scalar>
struct DeimProjector {
    Matrix<Scalar> basis;    // n x m
    IndexSet index_set;      // m points
    Matrix<Scalar> factor;   // n x m = basis * (P^T basis)^{-1}
    double condition_number = 0.0;
};

template <typename Scalar>
DeimProjector<Scalar> build_projector(const Matrix<Scalar>& Xi, const IndexSet& idx) {
    if (idx.size() != Xi.cols())
        throw DimensionError("build_projector: index count " +
                             std::to_string(idx.size()) + " != basis columns " +
                             std::to_string(Xi.cols()));
    Matrix<Scalar> A = sample_rows(Xi, idx);
    Eigen::FullPivLU<Matrix<Scalar>> lu(A);
    if (lu.rank() < A.rows())
        throw RankDeficiencyError("build_projector: sampled basis is singular",
                                  static_cast<int>(A.rows()));
    DeimProjector<Scalar> proj;
    proj.basis = Xi;
    proj.index_set = idx;
    proj.factor = Xi * lu.inverse();
    proj.condition_number = detail::spectral_condition(A);
    return proj;
}

template <typename Scalar>
Vector<Scalar> approx_nonlinearity(const DeimProjector<Scalar>& proj,
                                   const Vector<Scalar>& sampled) {
    if (sampled.size() != proj.index_set.size())
        throw DimensionError("approx_nonlinearity: sample count mismatch");
    return proj.factor * sampled;
}

template <typename Scalar>
Matrix<Scalar> approx_nonlinearity(const DeimProjector<Scalar>& proj,
                                   const Matrix<Scalar>& sampled_cols) {
    if (sampled_cols.rows() != proj.index_set.size())
        throw DimensionError("approx_nonlinearity: sample count mismatch");
    return proj.factor * sampled_cols;
}

}  // namespace roms
