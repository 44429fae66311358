#include <catch2/catch_amalgamated.hpp>

#include "roms/cqgle.hpp"
#include "roms/deim.hpp"
#include "roms/pod.hpp"
#include "roms/rom.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace roms;

namespace {

Matrix<Cplx> random_complex(Index rows, Index cols, std::uint64_t seed) {
    auto rng = rng_stream(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix<Cplx> M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = Cplx(normal(rng), normal(rng));
    return M;
}

Matrix<Cplx> random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
    Matrix<Cplx> M = random_complex(rows, cols, seed);
    Eigen::HouseholderQR<Matrix<Cplx>> qr(M);
    Matrix<Cplx> Q = qr.householderQ() * Matrix<Cplx>::Identity(rows, cols);
    return Q;
}

PODBasis<Cplx> basis_from(const Matrix<Cplx>& Q) {
    return PODBasis<Cplx>{Q, Eigen::VectorXd::Ones(Q.cols()), 1.0};
}

DeimProjector<Cplx> random_projector(Index n, Index m, std::uint64_t seed) {
    Matrix<Cplx> Xi = random_orthonormal(n, m, seed);
    return build_projector(Xi, deim_indices(Xi, static_cast<int>(m)));
}

}  // namespace

TEST_CASE("identity operator reduces to the identity block", "[rom]") {
    const Index n = 20, r = 4, m = 3;
    PODBasis<Cplx> basis = basis_from(random_orthonormal(n, r, 11));
    DeimProjector<Cplx> proj = random_projector(n, m, 12);

    Matrix<Cplx> L = Matrix<Cplx>::Identity(n, n);
    ReducedModel<Cplx> model = galerkin_reduce(L, basis, proj);

    REQUIRE(model.rank() == r);
    REQUIRE(model.samples() == m);
    CHECK((model.linear_reduced - Matrix<Cplx>::Identity(r, r)).norm() <= 1e-12);
    CHECK(model.sample_rows.values == proj.index_set.values);
    CHECK((model.sampled_state_basis - sample_rows(basis.modes, proj.index_set)).norm() ==
          0.0);
}

TEST_CASE("spectral action agrees with a dense transform oracle", "[rom]") {
    const Index n = 128;
    GLParams params = regime_params("b5");
    GLDomain domain;
    domain.n = n;

    // Dense oracle: build the normalized DFT explicitly and conjugate the
    // diagonal symbol through it, so the FFT-based action is checked against
    // an independent matrix construction.
    Vector<Cplx> lambda = linear_symbol(params, make_grid(domain).k);
    Matrix<Cplx> F(n, n), B(n, n);
    for (Index mrow = 0; mrow < n; ++mrow) {
        for (Index j = 0; j < n; ++j) {
            const double ang = 2.0 * pi() * static_cast<double>(mrow) *
                               static_cast<double>(j) / static_cast<double>(n);
            F(mrow, j) = std::polar(1.0 / static_cast<double>(n), -ang);
            B(j, mrow) = std::polar(1.0, ang);
        }
    }
    Matrix<Cplx> L_dense = B * lambda.asDiagonal() * F;

    PODBasis<Cplx> basis = basis_from(random_orthonormal(n, 5, 21));
    DeimProjector<Cplx> proj = random_projector(n, 4, 22);

    SpectralLinearAction action(params, domain);
    ReducedModel<Cplx> spectral = galerkin_reduce_action(action, basis, proj);
    ReducedModel<Cplx> dense = galerkin_reduce(L_dense, basis, proj);

    const double scale = dense.linear_reduced.norm() + 1.0;
    CHECK((spectral.linear_reduced - dense.linear_reduced).norm() <= 1e-10 * scale);
    CHECK((spectral.nonlinear_factor - dense.nonlinear_factor).norm() <= 1e-14);

    // r x m factor times the sampled interpolation basis collapses back to
    // the plain projection of that basis.
    Matrix<Cplx> sampled_xi = sample_rows(proj.basis, proj.index_set);
    Matrix<Cplx> lhs = spectral.nonlinear_factor * sampled_xi;
    Matrix<Cplx> rhs = basis.modes.adjoint() * proj.basis;
    CHECK((lhs - rhs).norm() <= 1e-12);
}

TEST_CASE("zero state is a fixed point of the reduced dynamics", "[rom]") {
    GLParams params = regime_params("b3");
    GLDomain domain;
    domain.n = 64;
    PODBasis<Cplx> basis = basis_from(random_orthonormal(64, 3, 31));
    DeimProjector<Cplx> proj = random_projector(64, 2, 32);
    ReducedModel<Cplx> model =
        galerkin_reduce_action(SpectralLinearAction(params, domain), basis, proj);

    Vector<Cplx> zero = Vector<Cplx>::Zero(3);
    Vector<Cplx> rhs = rom_step_rhs(model, zero, pointwise_nonlinearity(params));
    CHECK(rhs.norm() <= 1e-15);
}

TEST_CASE("vanishing nonlinearity leaves the exact linear exponential", "[rom]") {
    const Index n = 10, r = 3, m = 2;
    Vector<Cplx> d(n);
    d.setConstant(Cplx(-1.0, 0.0));
    d(0) = Cplx(-0.4, 1.3);
    d(1) = Cplx(-0.1, -0.7);
    d(2) = Cplx(-1.0, 0.2);
    Matrix<Cplx> L = d.asDiagonal();

    PODBasis<Cplx> basis = basis_from(Matrix<Cplx>::Identity(n, r));
    Matrix<Cplx> Xi = Matrix<Cplx>::Identity(n, n).middleCols(3, m);
    DeimProjector<Cplx> proj = build_projector(Xi, make_index_set({4, 5}, n));
    ReducedModel<Cplx> model = galerkin_reduce(L, basis, proj);

    // With identity basis columns the reduced block is exactly diag(d0..d2).
    CHECK((model.linear_reduced - Matrix<Cplx>(d.head(r).asDiagonal())).norm() <= 1e-15);

    Vector<Cplx> a0(r);
    a0 << Cplx(1.0, 0.0), Cplx(0.5, -0.2), Cplx(-0.3, 0.0);
    std::vector<double> times{0.0, 0.4, 1.1};
    auto zero_nl = [m](const Vector<Cplx>&) { return Vector<Cplx>(Vector<Cplx>::Zero(m)); };

    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    auto states = rom_integrate(model, a0, times, opts, zero_nl);

    REQUIRE(states.size() == times.size());
    CHECK((states[0] - a0).norm() == 0.0);
    for (std::size_t s = 1; s < times.size(); ++s) {
        for (Index j = 0; j < r; ++j) {
            Cplx expect = std::exp(d(j) * times[s]) * a0(j);
            CHECK(std::abs(states[s](j) - expect) <= 1e-8 * std::abs(expect) + 1e-12);
        }
    }
}

TEST_CASE("full sampling reproduces the projected full rhs", "[rom]") {
    const Index n = 12;
    PODBasis<Cplx> basis = basis_from(random_orthonormal(n, n, 41));
    Matrix<Cplx> Xi = Matrix<Cplx>::Identity(n, n);
    std::vector<int> all(n);
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = static_cast<int>(i) + 1;
    DeimProjector<Cplx> proj = build_projector(Xi, make_index_set(all, static_cast<int>(n)));

    Matrix<Cplx> L = 0.3 * random_complex(n, n, 42);
    ReducedModel<Cplx> model = galerkin_reduce(L, basis, proj);

    auto cubic = [](const Vector<Cplx>& u) {
        Vector<Cplx> out(u.size());
        for (Index i = 0; i < u.size(); ++i)
            out(i) = Cplx(0.7, 0.2) * std::norm(u(i)) * u(i);
        return out;
    };

    Vector<Cplx> a = 0.5 * random_complex(n, 1, 43).col(0);
    Vector<Cplx> u = basis.modes * a;
    Vector<Cplx> full = basis.modes.adjoint() * (L * u + cubic(u));
    Vector<Cplx> reduced = rom_step_rhs(model, a, cubic);
    CHECK((reduced - full).norm() <= 1e-10 * (full.norm() + 1.0));
}

TEST_CASE("each rhs evaluation samples the nonlinearity at exactly m points", "[rom]") {
    GLParams params = regime_params("b3");
    GLDomain domain;
    domain.n = 64;
    const Index m = 2;
    PODBasis<Cplx> basis = basis_from(random_orthonormal(64, 3, 51));
    DeimProjector<Cplx> proj = random_projector(64, m, 52);
    ReducedModel<Cplx> model =
        galerkin_reduce_action(SpectralLinearAction(params, domain), basis, proj);

    long calls = 0, coords = 0;
    auto counted = [&](const Vector<Cplx>& u) {
        ++calls;
        coords += static_cast<long>(u.size());
        Vector<Cplx> out;
        nonlinear_term(u, params, out);
        return out;
    };

    Vector<Cplx> a0(3);
    a0 << Cplx(0.2, 0.1), Cplx(-0.1, 0.0), Cplx(0.05, -0.3);
    rom_step_rhs(model, a0, counted);
    CHECK(calls == 1);
    CHECK(coords == static_cast<long>(m));

    calls = coords = 0;
    OdeStats stats;
    rom_integrate(model, a0, {0.0, 0.2, 0.4}, OdeOptions{}, counted, &stats);
    CHECK(calls == stats.rhs_evals);
    CHECK(coords == static_cast<long>(m) * stats.rhs_evals);
}

TEST_CASE("reduced cubic-quintic dynamics shadow the full simulation", "[rom]") {
    GLParams params = regime_params("b3");
    GLDomain domain;
    domain.n = 128;
    domain.t_final = 10.0;
    domain.snapshot_count = 101;
    SnapshotSet<Cplx> full = simulate(params, domain);

    // Offline stage: train past the transient, on states and on nonlinear
    // term snapshots separately.
    SnapshotSet<Cplx> train = drop_leading(full, 25);
    PODBasis<Cplx> basis = compute_pod(train.data, Truncation::energy(0.9999));
    Matrix<Cplx> nl_snap(train.dim(), train.count());
    Vector<Cplx> col;
    for (Index j = 0; j < train.count(); ++j) {
        nonlinear_term(Vector<Cplx>(train.data.col(j)), params, col);
        nl_snap.col(j) = col;
    }
    PODBasis<Cplx> nl_basis = compute_pod(nl_snap, Truncation::energy(0.9999));
    const int m = static_cast<int>(nl_basis.rank());
    DeimProjector<Cplx> proj = build_projector(nl_basis.modes, deim_indices(nl_basis, m));

    ReducedModel<Cplx> model =
        galerkin_reduce_action(SpectralLinearAction(params, domain), basis, proj);
    INFO("state rank " << model.rank() << ", samples " << model.samples());

    // Online stage: start halfway along the trajectory and march the reduced
    // system over the second half.
    const Index start = 50;
    Vector<Cplx> a0 = project(basis, Vector<Cplx>(full.data.col(start))).coeffs;
    std::vector<double> times(full.times.begin() + start, full.times.end());
    auto states = rom_integrate(model, a0, times, OdeOptions{}, pointwise_nonlinearity(params));
    Matrix<Cplx> traj = reconstruct_trajectory(model, states);

    double worst = 0.0;
    for (std::size_t s = 0; s < times.size(); ++s) {
        const Index j = start + static_cast<Index>(s);
        double rel = (traj.col(static_cast<Index>(s)) - full.data.col(j)).norm() /
                     full.data.col(j).norm();
        worst = std::max(worst, rel);
    }
    INFO("worst relative deviation " << worst);
    CHECK(worst < 0.05);

    // The reduced integrator inherits the tolerance behaviour of the full
    // one: halving rtol moves the answer by far less than the tolerance.
    OdeOptions coarse, fine;
    coarse.rtol = 1e-6;
    coarse.atol = 1e-8;
    fine.rtol = 5e-7;
    fine.atol = 1e-8;
    auto sa = rom_integrate(model, a0, {times.front(), times.back()}, coarse,
                            pointwise_nonlinearity(params));
    auto sb = rom_integrate(model, a0, {times.front(), times.back()}, fine,
                            pointwise_nonlinearity(params));
    CHECK((sa.back() - sb.back()).norm() / sb.back().norm() < 1e-5);
}

TEST_CASE("reduced model validation rejects malformed inputs", "[rom]") {
    const Index n = 10;
    PODBasis<Cplx> basis = basis_from(random_orthonormal(n, 3, 61));
    DeimProjector<Cplx> proj = random_projector(n, 2, 62);
    Matrix<Cplx> L = Matrix<Cplx>::Identity(n, n);
    ReducedModel<Cplx> model = galerkin_reduce(L, basis, proj);

    CHECK_THROWS_AS(galerkin_reduce(Matrix<Cplx>(Matrix<Cplx>::Identity(n, n + 2)), basis, proj),
                    DimensionError);
    DeimProjector<Cplx> small = random_projector(8, 2, 63);
    CHECK_THROWS_AS(galerkin_reduce(L, basis, small), DimensionError);

    auto nl_ok = [](const Vector<Cplx>& u) { return Vector<Cplx>(u); };
    CHECK_THROWS_AS(rom_step_rhs(model, Vector<Cplx>(Vector<Cplx>::Zero(5)), nl_ok),
                    DimensionError);

    Vector<Cplx> a = Vector<Cplx>::Zero(3);
    auto nl_short = [](const Vector<Cplx>&) { return Vector<Cplx>(Vector<Cplx>::Zero(1)); };
    CHECK_THROWS_AS(rom_step_rhs(model, a, nl_short), DimensionError);

    auto nl_nan = [](const Vector<Cplx>& u) {
        Vector<Cplx> out = u;
        out(0) = Cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        return out;
    };
    CHECK_THROWS_AS(rom_step_rhs(model, a, nl_nan), DivergenceError);

    CHECK_THROWS_AS(rom_integrate(model, Vector<Cplx>(Vector<Cplx>::Zero(4)),
                                  {0.0, 1.0}, OdeOptions{}, nl_ok),
                    DimensionError);
    CHECK_THROWS_AS(reconstruct_trajectory(model, {Vector<Cplx>(Vector<Cplx>::Zero(4))}),
                    DimensionError);

    ReducedModel<Cplx> bad = model;
    bad.sampled_state_basis = Matrix<Cplx>::Zero(5, 3);
    CHECK_THROWS_AS(validate_reduced_model(bad), DimensionError);
}
