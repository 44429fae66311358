#include "roms/brute.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace roms;
using roms_test::make_synthetic_regimes;
using roms_test::make_test_library;

namespace {

// Two one-hot regimes on n=4. The only k=2 pattern that sees both regimes is
// {1,2}; every other pair zeroes out at least one regime's samples.
std::vector<SnapshotSet<double>> one_hot_pair() {
    Matrix<double> Xa = Matrix<double>::Zero(4, 2), Xb = Matrix<double>::Zero(4, 2);
    Xa(0, 0) = 1;
    Xa(0, 1) = 2;
    Xb(1, 0) = 1;
    Xb(1, 1) = 3;
    return {build_snapshots(Xa, {0., 1.}, {}, "a"),
            build_snapshots(Xb, {0., 1.}, {}, "b")};
}

std::vector<LabeledState<double>> one_hot_states() {
    Vector<double> ua = Vector<double>::Zero(4), ub = Vector<double>::Zero(4);
    ua[0] = 1.5;
    ub[1] = 0.8;
    return {{"a", ua}, {"b", ub}};
}

}  // namespace

TEST_CASE("combination counts are exact below the cap", "[brute]") {
    std::uint64_t cap = 1'000'000'000;
    REQUIRE(combination_count(33, 3, cap) == 5456);
    REQUIRE(combination_count(10, 2, cap) == 45);
    REQUIRE(combination_count(5, 5, cap) == 1);
    REQUIRE(combination_count(5, 0, cap) == 1);
    REQUIRE(combination_count(4, 6, cap) == 0);
    REQUIRE(combination_count(64, 6, cap) == 74974368);
    REQUIRE(combination_count(64, 6, 10'000'000) == 10'000'001);  // cap + 1 marker
}

TEST_CASE("search over the one-hot pair keeps exactly one pattern", "[brute]") {
    auto lib = build_library(one_hot_pair(), 0.999);
    auto states = one_hot_states();
    NoiseSpec noise;
    noise.rounds = 100;
    noise.seed = 11;
    auto res = exhaustive_search(lib, 2, {1, 4}, states, noise);
    REQUIRE(res.candidates_total == 6);
    REQUIRE(res.stage1_survivors == 1);
    REQUIRE(res.retained == 1);
    REQUIRE(res.ranked.size() == 1);
    REQUIRE(res.ranked[0].indices.values == std::vector<int>{1, 2});
    REQUIRE(res.ranked[0].error < 1e-12);
    REQUIRE(res.ranked[0].min_accuracy == 1.0);
    REQUIRE(res.ranked[0].accuracy.at("a") == 1.0);
    REQUIRE(res.ranked[0].accuracy.at("b") == 1.0);
}

TEST_CASE("the guard refuses oversized enumerations", "[brute]") {
    auto lib = build_library(one_hot_pair(), 0.999);
    auto big = lib;
    big.concat = Matrix<double>::Identity(64, 2);
    for (auto& b : big.sublibraries) b.modes = Matrix<double>::Zero(64, 1);
    big.sublibraries[0].modes(0, 0) = 1;
    big.sublibraries[1].modes(1, 0) = 1;
    std::vector<LabeledState<double>> states{
        {"a", Vector<double>::Unit(64, 0)}, {"b", Vector<double>::Unit(64, 1)}};
    REQUIRE_THROWS_AS(exhaustive_search(big, 6, {1, 64}, states, NoiseSpec{}),
                      GuardError);
}

TEST_CASE("search inputs are validated", "[brute]") {
    auto lib = build_library(one_hot_pair(), 0.999);
    auto states = one_hot_states();
    REQUIRE_THROWS_AS(exhaustive_search(lib, 0, {1, 4}, states, NoiseSpec{}),
                      InvalidInput);
    REQUIRE_THROWS_AS(exhaustive_search(lib, 3, {2, 3}, states, NoiseSpec{}),
                      InvalidInput);
    REQUIRE_THROWS_AS(exhaustive_search(lib, 2, {1, 5}, states, NoiseSpec{}),
                      InvalidInput);
    REQUIRE_THROWS_AS(exhaustive_search(lib, 2, {0, 4}, states, NoiseSpec{}),
                      InvalidInput);
}

TEST_CASE("a full sweep ranks every retained pattern by error", "[brute]") {
    auto s = make_synthetic_regimes(40, 3, 2, 20, 3, 90);
    auto lib = make_test_library(s, 0.9);  // rank-1 regimes
    NoiseSpec noise;
    noise.rounds = 50;
    noise.accuracy_min = 0.9;
    noise.seed = 17;
    auto res = exhaustive_search(lib, 2, {6, 34}, s.validation, noise);
    REQUIRE(res.candidates_total == combination_count(29, 2, brute_enumeration_cap));
    REQUIRE(res.stage1_survivors >= res.retained);
    REQUIRE(res.retained == res.ranked.size());
    REQUIRE(res.retained >= 1);
    for (std::size_t i = 1; i < res.ranked.size(); ++i)
        REQUIRE(res.ranked[i].error >= res.ranked[i - 1].error);
    for (const auto& r : res.ranked) {
        REQUIRE(r.min_accuracy >= noise.accuracy_min);
        REQUIRE(std::is_sorted(r.indices.values.begin(), r.indices.values.end()));
        for (int v : r.indices.values) REQUIRE((v >= 6 && v <= 34));
    }

    auto rerun = exhaustive_search(lib, 2, {6, 34}, s.validation, noise);
    REQUIRE(rerun.ranked.size() == res.ranked.size());
    for (std::size_t i = 0; i < res.ranked.size(); ++i) {
        REQUIRE(rerun.ranked[i].indices.values == res.ranked[i].indices.values);
        REQUIRE(rerun.ranked[i].error == res.ranked[i].error);
        REQUIRE(rerun.ranked[i].min_accuracy == res.ranked[i].min_accuracy);
    }
}

TEST_CASE("position histograms count sorted index slots", "[brute]") {
    std::vector<RankedSet> ranked(3);
    ranked[0].indices = make_index_set({6, 5}, 40);  // selection order, not sorted
    ranked[1].indices = make_index_set({7, 9}, 40);
    ranked[2].indices = make_index_set({5, 9}, 40);
    IndexWindow window{5, 10};
    auto hist = position_histograms(ranked, 2, window);
    REQUIRE(hist.size() == 2);
    REQUIRE(hist[0] == std::vector<long>{2, 0, 1, 0, 0, 0});
    REQUIRE(hist[1] == std::vector<long>{0, 1, 0, 0, 2, 0});
    long total = 0;
    for (const auto& row : hist)
        for (long c : row) total += c;
    REQUIRE(total == 2 * 3);

    REQUIRE_THROWS_AS(position_histograms(ranked, 3, window), DimensionError);
    std::vector<RankedSet> outside(1);
    outside[0].indices = make_index_set({2, 7}, 40);
    REQUIRE_THROWS_AS(position_histograms(outside, 2, window), InvalidInput);
    REQUIRE_THROWS_AS(position_histograms(ranked, 2, IndexWindow{9, 4}), InvalidInput);
}
