#include "roms/regime_library.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace roms;
using roms_test::make_synthetic_regimes;
using roms_test::make_test_library;

namespace {

// Two orthogonal rank-1 regimes on n=6; used where answers are worked by hand.
std::vector<SnapshotSet<double>> orthogonal_pair() {
    Vector<double> ua(6), ub(6);
    ua << 1, 1, 0, 0, 0, 0;
    ub << 0, 0, 1, -1, 0, 0;
    ua /= ua.norm();
    ub /= ub.norm();
    Matrix<double> Xa(6, 3), Xb(6, 2);
    Xa.col(0) = ua;
    Xa.col(1) = 2 * ua;
    Xa.col(2) = 3 * ua;
    Xb.col(0) = 2 * ub;
    Xb.col(1) = ub;
    return {build_snapshots(Xa, {0., 1., 2.}, {}, "a"),
            build_snapshots(Xb, {0., 1.}, {}, "b")};
}

}  // namespace

TEST_CASE("library concatenates per-regime bases in declaration order", "[library]") {
    auto lib = build_library(orthogonal_pair(), 0.999);
    REQUIRE(lib.regime_ids == std::vector<std::string>{"a", "b"});
    REQUIRE(lib.sublibraries[0].rank() == 1);
    REQUIRE(lib.sublibraries[1].rank() == 1);
    REQUIRE(lib.concat.cols() == 2);
    REQUIRE((lib.concat.col(0) - lib.sublibraries[0].modes.col(0)).norm() < 1e-14);
    REQUIRE((lib.concat.col(1) - lib.sublibraries[1].modes.col(0)).norm() < 1e-14);
    REQUIRE(lib.sublibrary("b").rank() == 1);
    REQUIRE_THROWS_AS(lib.sublibrary("c"), InvalidInput);
}

TEST_CASE("library construction validates its inputs", "[library]") {
    auto pair = orthogonal_pair();
    std::vector<SnapshotSet<double>> single{pair[0]};
    REQUIRE_THROWS_AS(build_library(single, 0.999), InvalidInput);
    auto dup = pair;
    dup[1].regime = "a";
    REQUIRE_THROWS_AS(build_library(dup, 0.999), InvalidInput);
    auto unlabeled = pair;
    unlabeled[0].regime.clear();
    REQUIRE_THROWS_AS(build_library(unlabeled, 0.999), InvalidInput);
    auto mismatched = pair;
    mismatched[1].data = Matrix<double>::Ones(5, 2);
    mismatched[1].grid.clear();
    REQUIRE_THROWS_AS(build_library(mismatched, 0.999), DimensionError);
}

TEST_CASE("classification of an in-span state is exact with unit margin", "[library]") {
    // State 3*ua sampled at rows 1 and 3: regime a fits exactly, regime b
    // reproduces nothing, so the relative residuals are 0 and 1.
    auto lib = build_library(orthogonal_pair(), 0.999);
    Vector<double> ua(6);
    ua << 1, 1, 0, 0, 0, 0;
    ua /= ua.norm();
    auto idx = make_index_set({1, 3}, 6);
    auto result = classify(lib, idx, sample_entries(Vector<double>(3.0 * ua), idx));
    REQUIRE(result.predicted == "a");
    REQUIRE(result.residuals.at("a") == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(result.residuals.at("b") == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(result.margin == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("classification is scale invariant", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 2, 71);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 20, 31}, 40);
    const auto& u = s.validation.front().state;
    auto r1 = classify(lib, idx, sample_entries(u, idx));
    auto r2 = classify(lib, idx, sample_entries(Vector<double>(250.0 * u), idx));
    REQUIRE(r1.predicted == r2.predicted);
    for (const auto& [id, res] : r1.residuals)
        REQUIRE(r2.residuals.at(id) == Catch::Approx(res).margin(1e-12));
}

TEST_CASE("every validation state classifies into its own regime", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 4, 72);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 14, 20, 26, 32}, 40);
    for (const auto& v : s.validation) {
        auto r = classify(lib, idx, sample_entries(v.state, idx));
        REQUIRE(r.predicted == v.regime);
    }
}

TEST_CASE("zero samples cannot be classified", "[library]") {
    auto lib = build_library(orthogonal_pair(), 0.999);
    auto idx = make_index_set({5, 6}, 6);  // both regimes vanish here
    Vector<double> ua(6);
    ua << 1, 1, 0, 0, 0, 0;
    REQUIRE_THROWS_AS(classify(lib, idx, sample_entries(ua, idx)),
                      ClassificationError);
}

TEST_CASE("selection evaluation scores feasibility and mean error", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 4, 73);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 14, 20, 26, 32}, 40);
    auto good = evaluate_selection(lib, idx, s.validation);
    REQUIRE(good.feasible);
    REQUIRE(good.mean_error < 0.2);
    // Any misclassified state makes the whole selection infeasible; a state
    // carrying the wrong label forces that deterministically.
    auto mislabeled = s.validation;
    mislabeled.push_back({"r2", s.validation.front().state});
    auto bad = evaluate_selection(lib, idx, mislabeled);
    REQUIRE_FALSE(bad.feasible);
    REQUIRE(std::isinf(bad.mean_error));
}

TEST_CASE("selection where every regime samples to zero is infeasible", "[library]") {
    auto lib = build_library(orthogonal_pair(), 0.999);
    Vector<double> ua(6);
    ua << 1, 1, 0, 0, 0, 0;
    std::vector<LabeledState<double>> validation{{"a", ua}};
    auto score = evaluate_selection(lib, make_index_set({5, 6}, 6), validation);
    REQUIRE_FALSE(score.feasible);
    REQUIRE(std::isinf(score.mean_error));
}

TEST_CASE("noisy trials are deterministic for a seed", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 3, 74);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 20, 31}, 40);
    auto a = noisy_trials(lib, idx, s.validation, 0.2, 100, 7);
    auto b = noisy_trials(lib, idx, s.validation, 0.2, 100, 7);
    REQUIRE(a.accuracy == b.accuracy);
    auto c = noisy_trials(lib, idx, s.validation, 0.2, 100, 8);
    REQUIRE(a.min_accuracy >= 0.0);
    REQUIRE(c.min_accuracy <= 1.0);
}

TEST_CASE("noisy trials ignore the selection's presentation order", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 3, 74);
    auto lib = make_test_library(s);
    auto a = noisy_trials(lib, make_index_set({8, 20, 31}, 40), s.validation, 0.2, 100, 7);
    auto b = noisy_trials(lib, make_index_set({31, 8, 20}, 40), s.validation, 0.2, 100, 7);
    REQUIRE(a.accuracy == b.accuracy);
}

TEST_CASE("noiseless trials on a separable library are perfect", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 3, 75);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 20, 31}, 40);
    auto r = noisy_trials(lib, idx, s.validation, 0.0, 50, 7);
    REQUIRE(r.min_accuracy == 1.0);
}

TEST_CASE("accuracy decays with the noise level", "[library]") {
    // Closely spaced regimes so noise actually bites; averaged over seeds to
    // smooth sampling jitter.
    auto s = make_synthetic_regimes(40, 3, 2, 20, 3, 76, 0.35);
    auto lib = make_test_library(s);
    auto idx = make_index_set({10, 14, 18}, 40);
    std::vector<double> levels{0.0, 0.05, 0.1, 0.3};
    std::vector<double> mean_acc;
    for (double sigma : levels) {
        double acc = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto r = noisy_trials(lib, idx, s.validation, sigma, 200, seed);
            double sum = 0.0;
            for (const auto& [id, a] : r.accuracy) sum += a;
            acc += sum / static_cast<double>(r.accuracy.size());
        }
        mean_acc.push_back(acc / 5.0);
    }
    for (std::size_t i = 1; i < mean_acc.size(); ++i)
        REQUIRE(mean_acc[i] <= mean_acc[i - 1] + 0.02);
    REQUIRE(mean_acc.front() == 1.0);
    REQUIRE(mean_acc.back() < 1.0);
}

TEST_CASE("trials require test states for every regime", "[library]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 2, 77);
    auto lib = make_test_library(s);
    auto idx = make_index_set({8, 20, 31}, 40);
    std::vector<LabeledState<double>> partial(s.validation.begin(),
                                              s.validation.begin() + 2);
    REQUIRE_THROWS_AS(noisy_trials(lib, idx, partial, 0.1, 10, 1), InvalidInput);
    REQUIRE_THROWS_AS(noisy_trials(lib, idx, s.validation, 0.1, 0, 1), InvalidInput);
}
