#pragma once

#include "roms/common.hpp"
#include "roms/deim.hpp"
#include "roms/indices.hpp"
#include "roms/ode.hpp"
#include "roms/pod.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace roms {

// Everything the reduced time loop needs, precomputed once. The loop then
// works with r- and m-sized objects only; the full dimension n appears again
// only when a trajectory is reconstructed.
template <typename Scalar>
struct ReducedModel {
    Matrix<Scalar> linear_reduced;       // r x r
    Matrix<Scalar> nonlinear_factor;     // r x m
    IndexSet sample_rows;                // m interpolation points
    PODBasis<Scalar> state_basis;        // n x r
    Matrix<Scalar> sampled_state_basis;  // m x r

    Index rank() const { return linear_reduced.rows(); }
    Index samples() const { return nonlinear_factor.cols(); }
};

template <typename Scalar>
void validate_reduced_model(const ReducedModel<Scalar>& model) {
    const Index r = model.rank();
    const Index m = model.samples();
    if (model.linear_reduced.cols() != r)
        throw DimensionError("rom: linear block must be square");
    if (model.state_basis.rank() != r)
        throw DimensionError("rom: state basis rank != reduced dimension");
    if (model.sampled_state_basis.rows() != m || model.sampled_state_basis.cols() != r)
        throw DimensionError("rom: sampled basis must be m x r");
    if (model.sample_rows.size() != m)
        throw DimensionError("rom: sample count != nonlinear factor columns");
    if (model.sample_rows.ambient != model.state_basis.dim())
        throw DimensionError("rom: sample ambient != state dimension");
}

// Offline assembly from the action of the linear operator. L_action maps an
// n x r matrix to L applied columnwise, which covers both a dense matrix
// and a spectral diagonal operator.
template <typename Scalar, typename Op>
ReducedModel<Scalar> galerkin_reduce_action(const Op& L_action,
                                            const PODBasis<Scalar>& basis,
                                            const DeimProjector<Scalar>& proj) {
    if (proj.basis.rows() != basis.dim())
        throw DimensionError("galerkin_reduce: projector dimension " +
                             std::to_string(proj.basis.rows()) + " != basis dimension " +
                             std::to_string(basis.dim()));
    Matrix<Scalar> L_psi = L_action(basis.modes);
    if (L_psi.rows() != basis.dim() || L_psi.cols() != basis.rank())
        throw DimensionError("galerkin_reduce: operator changed the shape of the basis");

    ReducedModel<Scalar> model;
    model.linear_reduced = basis.modes.adjoint() * L_psi;
    model.nonlinear_factor = basis.modes.adjoint() * proj.factor;
    model.sample_rows = proj.index_set;
    model.state_basis = basis;
    model.sampled_state_basis = sample_rows(basis.modes, proj.index_set);
    validate_reduced_model(model);
    return model;
}

template <typename Scalar>
ReducedModel<Scalar> galerkin_reduce(const Matrix<Scalar>& L,
                                     const PODBasis<Scalar>& basis,
                                     const DeimProjector<Scalar>& proj) {
    if (L.rows() != basis.dim() || L.cols() != basis.dim())
        throw DimensionError("galerkin_reduce: operator must be n x n");
    return galerkin_reduce_action(
        [&L](const Matrix<Scalar>& M) { return Matrix<Scalar>(L * M); }, basis, proj);
}

// da/dt = linear_reduced a + nonlinear_factor N(sampled_state_basis a).
// N sees exactly the m sampled state values and nothing else; that is the
// whole point of the interpolation, so the contract is checked hard.
template <typename Scalar, typename NlFunc>
Vector<Scalar> rom_step_rhs(const ReducedModel<Scalar>& model, const Vector<Scalar>& a,
                            NlFunc&& N_pointwise) {
    if (a.size() != model.rank())
        throw DimensionError("rom: state has wrong reduced dimension");
    Vector<Scalar> u_sampled = model.sampled_state_basis * a;
    Vector<Scalar> n_sampled = N_pointwise(u_sampled);
    if (n_sampled.size() != model.samples())
        throw DimensionError("rom: nonlinearity returned wrong sample count");
    if (!n_sampled.allFinite())
        throw DivergenceError("rom: non-finite nonlinearity",
                              std::numeric_limits<double>::quiet_NaN());
    return model.linear_reduced * a + model.nonlinear_factor * n_sampled;
}

// Reduced trajectory at the requested times (times[0] carries a0), using
// the same embedded pair as the full simulations.
template <typename Scalar, typename NlFunc>
std::vector<Vector<Scalar>> rom_integrate(const ReducedModel<Scalar>& model,
                                          const Vector<Scalar>& a0,
                                          const std::vector<double>& times,
                                          const OdeOptions& opts, NlFunc&& N_pointwise,
                                          OdeStats* stats = nullptr) {
    validate_reduced_model(model);
    if (a0.size() != model.rank())
        throw DimensionError("rom: initial state has wrong reduced dimension");
    auto rhs = [&](double, const Vector<Scalar>& a) {
        return rom_step_rhs(model, a, N_pointwise);
    };
    return integrate_at_times(rhs, a0, times, opts, stats);
}

// Lifts reduced states back to the full space; the only n-sized step in the
// online phase, and an optional one.
template <typename Scalar>
Matrix<Scalar> reconstruct_trajectory(const ReducedModel<Scalar>& model,
                                      const std::vector<Vector<Scalar>>& states) {
    Matrix<Scalar> out(model.state_basis.dim(), static_cast<Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j) {
        if (states[j].size() != model.rank())
            throw DimensionError("rom: trajectory state has wrong dimension");
        out.col(static_cast<Index>(j)) = model.state_basis.modes * states[j];
    }
    return out;
}

}  // namespace roms
