#pragma once

#include "roms/common.hpp"
#include "roms/snapshots.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace roms {

// Rank-r or energy-threshold truncation request for compute_pod.
struct Truncation {
    enum class Kind { Rank, Energy };
    Kind kind = Kind::Energy;
    Index rank_value = 0;
    double energy_value = 0.0;

    static Truncation rank(Index r) {
        Truncation t;
        t.kind = Kind::Rank;
        t.rank_value = r;
        return t;
    }
    static Truncation energy(double eta) {
        Truncation t;
        t.kind = Kind::Energy;
        t.energy_value = eta;
        return t;
    }
};

// Orthonormal modes with their singular values. energy_captured is the
// fraction sum_{j<=r} s_j^2 / sum_j s_j^2 over the full spectrum.
template <typename Scalar>
struct PODBasis {
    Matrix<Scalar> modes;             // n x r
    Eigen::VectorXd singular_values;  // r, nonincreasing
    double energy_captured = 0.0;

    Index dim() const { return modes.rows(); }
    Index rank() const { return modes.cols(); }
};

template <typename Scalar>
struct ReducedState {
    Vector<Scalar> coeffs;
};

template <typename Scalar>
PODBasis<Scalar> compute_pod(const Matrix<Scalar>& X, const Truncation& trunc) {
    if (X.rows() < 1 || X.cols() < 1)
        throw InvalidInput("compute_pod: empty snapshot matrix");
    if (X.norm() == 0.0)
        throw DegenerateInput("compute_pod: snapshot matrix is identically zero");

    Eigen::BDCSVD<Matrix<Scalar>> svd(X, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const Index kmax = sv.size();

    double total = 0.0;
    for (Index j = 0; j < kmax; ++j) total += sv[j] * sv[j];

    const double tol = sv[0] * static_cast<double>(std::max(X.rows(), X.cols())) *
                       Eigen::NumTraits<double>::epsilon();
    Index numerical_rank = 0;
    while (numerical_rank < kmax && sv[numerical_rank] > tol) ++numerical_rank;

    Index r = 0;
    if (trunc.kind == Truncation::Kind::Rank) {
        if (trunc.rank_value < 1)
            throw InvalidInput("compute_pod: rank must be >= 1");
        if (trunc.rank_value > numerical_rank)
            throw InvalidInput("compute_pod: requested rank " +
                               std::to_string(trunc.rank_value) +
                               " exceeds matrix rank " + std::to_string(numerical_rank));
        r = trunc.rank_value;
    } else {
        const double eta = trunc.energy_value;
        if (!(eta > 0.0) || eta > 1.0)
            throw InvalidInput("compute_pod: energy threshold must be in (0, 1]");
        if (eta == 1.0) {
            r = numerical_rank;
        } else {
            double cum = 0.0;
            while (r < numerical_rank) {
                cum += sv[r] * sv[r];
                ++r;
                if (cum >= eta * total) break;
            }
        }
        if (r < 1) r = 1;
    }

    PODBasis<Scalar> basis;
    basis.modes = svd.matrixU().leftCols(r);
    basis.singular_values = sv.head(r);
    double kept = 0.0;
    for (Index j = 0; j < r; ++j) kept += sv[j] * sv[j];
    basis.energy_captured = kept / total;
    return basis;
}

template <typename Scalar>
PODBasis<Scalar> compute_pod(const SnapshotSet<Scalar>& snaps, const Truncation& trunc) {
    return compute_pod(snaps.data, trunc);
}

template <typename Scalar>
ReducedState<Scalar> project(const PODBasis<Scalar>& basis, const Vector<Scalar>& u) {
    if (u.size() != basis.dim())
        throw DimensionError("project: state dimension " + std::to_string(u.size()) +
                             " != basis dimension " + std::to_string(basis.dim()));
    return ReducedState<Scalar>{basis.modes.adjoint() * u};
}

template <typename Scalar>
Vector<Scalar> reconstruct(const PODBasis<Scalar>& basis, const ReducedState<Scalar>& a) {
    if (a.coeffs.size() != basis.rank())
        throw DimensionError("reconstruct: coefficient length " +
                             std::to_string(a.coeffs.size()) + " != basis rank " +
                             std::to_string(basis.rank()));
    return basis.modes * a.coeffs;
}

}  // namespace roms
