#include "roms/gappy.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace roms;
using C = std::complex<double>;

namespace {

template <typename Scalar>
PODBasis<Scalar> basis_from(Matrix<Scalar> modes) {
    PODBasis<Scalar> b;
    b.modes = std::move(modes);
    b.singular_values = Eigen::VectorXd::Ones(b.modes.cols());
    b.energy_captured = 1.0;
    return b;
}

template <typename Scalar>
PODBasis<Scalar> random_basis(Index n, Index r, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Matrix<Scalar> M(n, r);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < r; ++j) {
            if constexpr (is_complex_v<Scalar>)
                M(i, j) = {dist(rng), dist(rng)};
            else
                M(i, j) = dist(rng);
        }
    Eigen::HouseholderQR<Matrix<Scalar>> qr(M);
    return basis_from(Matrix<Scalar>(qr.householderQ() * Matrix<Scalar>::Identity(n, r)));
}

// 99.9th percentile of chi-square via the Wilson-Hilferty cube approximation.
double chi2_quantile_999(double dof) {
    double z = 3.0902;  // N(0,1) quantile at 0.999
    double a = 2.0 / (9.0 * dof);
    double t = 1.0 - a + z * std::sqrt(a);
    return dof * t * t * t;
}

}  // namespace

TEST_CASE("normal-equation fit matches the worked 3x2 example", "[gappy]") {
    // Library rows (1,0),(0,1),(1,1); samples at rows 1 and 3 of u=(2,1,3).
    // M = [[2,1],[1,1]], f = (5,3), solution (2,1).
    Matrix<double> modes(3, 2);
    modes << 1, 0, 0, 1, 1, 1;
    auto sys = make_gappy_system(basis_from(modes), make_index_set({1, 3}, 3));
    Vector<double> samples(2);
    samples << 2, 3;
    auto a = gappy_fit(sys, samples);
    REQUIRE(a.coeffs[0] == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(a.coeffs[1] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(sys.gram(0, 0) == Catch::Approx(2.0));
    REQUIRE(sys.gram(0, 1) == Catch::Approx(1.0));
    REQUIRE(sys.gram(1, 1) == Catch::Approx(1.0));
}

TEST_CASE("sampling every row reduces to orthogonal projection", "[gappy]") {
    auto lib = random_basis<C>(24, 6, 51);
    std::vector<int> all(24);
    for (int i = 0; i < 24; ++i) all[static_cast<std::size_t>(i)] = i + 1;
    auto sys = make_gappy_system(lib, make_index_set(all, 24));
    std::mt19937_64 rng(52);
    std::normal_distribution<double> dist;
    Vector<C> u(24);
    for (Index i = 0; i < 24; ++i) u[i] = {dist(rng), dist(rng)};
    auto a = gappy_fit(sys, u);
    Vector<C> direct = lib.modes.adjoint() * u;
    REQUIRE((a.coeffs - direct).norm() <= 1e-12 * direct.norm());
    // Gram eigenvalues live in [0, 1] up to roundoff for orthonormal modes.
    Eigen::SelfAdjointEigenSolver<Matrix<C>> eig(sys.gram);
    REQUIRE(eig.eigenvalues().minCoeff() >= -1e-10);
    REQUIRE(eig.eigenvalues().maxCoeff() <= 1.0 + 1e-10);
}

TEST_CASE("underdetermined systems return the minimum-norm solution", "[gappy]") {
    auto lib = random_basis<double>(30, 6, 53);
    auto idx = make_index_set({2, 11, 23}, 30);  // m=3 < r=6
    auto sys = make_gappy_system(lib, idx);
    REQUIRE(sys.rank_deficient);
    REQUIRE(sys.numerical_rank == 3);
    Vector<double> samples(3);
    samples << 0.4, -1.2, 0.7;
    auto a = gappy_fit(sys, samples);
    // Oracle: pseudo-inverse through a full SVD of the sampled mode matrix.
    Eigen::JacobiSVD<Matrix<double>> svd(sys.sampled_modes,
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector<double> oracle = svd.solve(samples);
    REQUIRE((a.coeffs - oracle).norm() <= 1e-10 * oracle.norm());
    // Any vector in the nullspace of the sampled modes would grow the norm.
    REQUIRE(a.coeffs.norm() <= oracle.norm() + 1e-10);
}

TEST_CASE("fit is a local optimum of the sampled residual", "[gappy]") {
    auto lib = random_basis<C>(40, 4, 54);
    auto idx = select_random(40, 9, {}, 55);
    auto sys = make_gappy_system(lib, idx);
    std::mt19937_64 rng(56);
    std::normal_distribution<double> dist;
    Vector<C> u(40);
    for (Index i = 0; i < 40; ++i) u[i] = {dist(rng), dist(rng)};
    Vector<C> samples = sample_entries(u, idx);
    auto a = gappy_fit(sys, samples);
    double base = (sys.sampled_modes * a.coeffs - samples).norm();
    for (Index j = 0; j < a.coeffs.size(); ++j) {
        for (C delta : {C(1e-3, 0), C(-1e-3, 0), C(0, 1e-3), C(0, -1e-3)}) {
            Vector<C> p = a.coeffs;
            p[j] += delta;
            double perturbed = (sys.sampled_modes * p - samples).norm();
            REQUIRE(perturbed >= base - 1e-12);
        }
    }
}

TEST_CASE("fit scales linearly with the samples", "[gappy]") {
    auto lib = random_basis<double>(20, 3, 57);
    auto sys = make_gappy_system(lib, make_index_set({1, 5, 9, 13, 17}, 20));
    Vector<double> s(5);
    s << 1, -2, 0.5, 3, -1;
    auto a1 = gappy_fit(sys, s);
    auto a2 = gappy_fit(sys, Vector<double>(2.5 * s));
    REQUIRE((a2.coeffs - 2.5 * a1.coeffs).norm() <= 1e-12 * a1.coeffs.norm());
}

TEST_CASE("reconstruction error conventions", "[gappy]") {
    Vector<double> u(3), zero(3);
    u << 3, 0, 4;
    zero.setZero();
    REQUIRE(reconstruction_error(u, zero) == Catch::Approx(1.0));
    REQUIRE(reconstruction_error(u, u) == 0.0);
    REQUIRE(reconstruction_error(zero, zero) == 0.0);
    REQUIRE(std::isinf(reconstruction_error(zero, u)));
    REQUIRE_THROWS_AS(reconstruction_error(u, Vector<double>(2)), DimensionError);
}

TEST_CASE("random selection is windowed, distinct and seeded", "[gappy]") {
    auto a = select_random(100, 10, {21, 60}, 61);
    auto b = select_random(100, 10, {21, 60}, 61);
    REQUIRE(a.values == b.values);
    for (int v : a.values) {
        REQUIRE(v >= 21);
        REQUIRE(v <= 60);
    }
    auto c = select_random(100, 10, {21, 60}, 62);
    REQUIRE(a.values != c.values);
    // m equal to the window size returns the whole window.
    auto full = select_random(50, 8, {40, 47}, 63);
    auto sorted = full.sorted();
    for (int i = 0; i < 8; ++i) REQUIRE(sorted[static_cast<std::size_t>(i)] == 40 + i);
    REQUIRE_THROWS_AS(select_random(50, 9, {40, 47}, 63), InvalidInput);
    REQUIRE_THROWS_AS(select_random(50, 1, {40, 51}, 63), InvalidInput);
}

TEST_CASE("random selection is uniform over the window", "[gappy]") {
    // 4000 draws of 5 points from a 50-wide window; each slot expects 400
    // hits. Chi-square with 49 dof at the 0.1% level.
    const int w = 50;
    std::vector<double> counts(static_cast<std::size_t>(w), 0.0);
    for (int trial = 0; trial < 4000; ++trial) {
        auto idx = select_random(80, 5, {11, 60}, 1000 + static_cast<std::uint64_t>(trial));
        for (int v : idx.values) counts[static_cast<std::size_t>(v - 11)] += 1.0;
    }
    double expected = 4000.0 * 5.0 / w;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    REQUIRE(stat < chi2_quantile_999(w - 1.0));
}

TEST_CASE("condition-number selection matches the exhaustive optimum", "[gappy]") {
    // Small enough to enumerate: all C(6,3) subsets of a fixed 6x3 library.
    auto lib = random_basis<double>(6, 3, 64);
    auto greedy = select_condition_number(lib, 3);
    double greedy_cond =
        roms::detail::pseudo_condition(sample_rows(lib.modes, greedy));
    double best = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= 6; ++a)
        for (int b = a + 1; b <= 6; ++b)
            for (int c = b + 1; c <= 6; ++c) {
                auto idx = make_index_set({a, b, c}, 6);
                best = std::min(best,
                                roms::detail::pseudo_condition(sample_rows(lib.modes, idx)));
            }
    REQUIRE(greedy_cond == Catch::Approx(best).epsilon(1e-9));
}

TEST_CASE("condition-number selection tolerates m below the rank", "[gappy]") {
    auto lib = random_basis<C>(40, 10, 65);
    auto idx = select_condition_number(lib, 3);
    REQUIRE(idx.size() == 3);
    auto sys = make_gappy_system(lib, idx);
    REQUIRE(sys.rank_deficient);
    // Greedy keeps the sampled system as well-posed as 3 points allow.
    REQUIRE(roms::detail::pseudo_condition(sys.sampled_modes) < 1e6);
}

TEST_CASE("extrema selection walks real modes max then min", "[gappy]") {
    Matrix<double> modes(8, 2);
    modes.col(0) << 3, 1, 0, -2, 5, 2, -4, 1;   // max at 5, min at 7
    modes.col(1) << 0, 9, 0, 0, -1, 0, 0, -6;   // max at 2, min at 8
    auto lib = basis_from(modes);
    REQUIRE(select_extrema(lib, 4).values == std::vector<int>{5, 7, 2, 8});
    REQUIRE(select_extrema(lib, 3).values == std::vector<int>{5, 7, 2});
}

TEST_CASE("extrema selection uses modulus peaks for complex modes", "[gappy]") {
    Matrix<C> modes(8, 1);
    modes.col(0) << C(1, 0), C(0, 5), C(2, 0), C(1, 1), C(-4, 0), C(0, 3), C(0.5, 0),
        C(0, 0);
    // |v| = (1, 5, 2, sqrt2, 4, 3, 0.5, 0): separated peaks at entries 2 and 5.
    auto lib = basis_from(modes);
    REQUIRE(select_extrema(lib, 2).values == std::vector<int>{2, 5});
}

TEST_CASE("extrema selection skips duplicates and reports exhaustion", "[gappy]") {
    Matrix<double> modes(6, 2);
    modes.col(0) << 1, 0, 0, 0, 0, -1;
    modes.col(1) << 2, 0, 0, 0, 0, -2;  // same extremum locations as mode 1
    auto lib = basis_from(modes);
    REQUIRE(select_extrema(lib, 2).values == std::vector<int>{1, 6});
    REQUIRE_THROWS_AS(select_extrema(lib, 3), InvalidInput);
}

TEST_CASE("system construction validates dimensions", "[gappy]") {
    auto lib = random_basis<double>(12, 3, 66);
    REQUIRE_THROWS_AS(make_gappy_system(lib, make_index_set({1, 2}, 11)), DimensionError);
    auto sys = make_gappy_system(lib, make_index_set({1, 2, 3, 4}, 12));
    REQUIRE_THROWS_AS(gappy_fit(sys, Vector<double>(3)), DimensionError);
}
