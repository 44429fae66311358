#pragma once

#include "roms/common.hpp"
#include "roms/matrix_io.hpp"

#include <string>
#include <utility>
#include <vector>

namespace roms {

// Column-ordered snapshot matrix. Column j is the state at times[j]; times
// are strictly increasing. grid is optional spatial metadata.
template <typename Scalar>
struct SnapshotSet {
    Matrix<Scalar> data;        // n x p
    std::vector<double> times;  // p
    std::vector<double> grid;   // n when present, else empty
    std::string regime;         // label, may be empty

    Index dim() const { return data.rows(); }
    Index count() const { return data.cols(); }
};

template <typename Scalar>
void validate_snapshots(const SnapshotSet<Scalar>& s) {
    if (s.data.rows() < 1 || s.data.cols() < 1)
        throw InvalidInput("snapshots: need n >= 1 and p >= 1");
    if (static_cast<Index>(s.times.size()) != s.data.cols())
        throw DimensionError("snapshots: times length != column count");
    for (std::size_t j = 1; j < s.times.size(); ++j)
        if (!(s.times[j] > s.times[j - 1]))
            throw InvalidInput("snapshots: times must be strictly increasing");
    if (!s.grid.empty()) {
        if (static_cast<Index>(s.grid.size()) != s.data.rows())
            throw DimensionError("snapshots: grid length != state dimension");
        for (std::size_t i = 1; i < s.grid.size(); ++i)
            if (!(s.grid[i] > s.grid[i - 1]))
                throw InvalidInput("snapshots: grid must be strictly increasing");
    }
}

template <typename Scalar>
SnapshotSet<Scalar> build_snapshots(Matrix<Scalar> states, std::vector<double> times,
                                    std::vector<double> grid = {},
                                    std::string regime = {}) {
    SnapshotSet<Scalar> s{std::move(states), std::move(times), std::move(grid),
                          std::move(regime)};
    validate_snapshots(s);
    return s;
}

// Drops the leading `count` columns; times keep their absolute values.
template <typename Scalar>
SnapshotSet<Scalar> drop_leading(const SnapshotSet<Scalar>& s, Index count) {
    if (count < 0 || count >= s.count())
        throw InvalidInput("drop_leading: count must be in [0, p)");
    SnapshotSet<Scalar> out;
    out.data = s.data.rightCols(s.count() - count);
    out.times.assign(s.times.begin() + count, s.times.end());
    out.grid = s.grid;
    out.regime = s.regime;
    return out;
}

// Splits off `held_out` evenly spread columns. First element of the pair is
// the training set, second the held-out set. Deterministic.
template <typename Scalar>
std::pair<SnapshotSet<Scalar>, SnapshotSet<Scalar>> split_holdout(
    const SnapshotSet<Scalar>& s, Index held_out) {
    const Index p = s.count();
    if (held_out < 1 || held_out >= p)
        throw InvalidInput("split_holdout: need 1 <= held_out < p");
    std::vector<char> is_held(static_cast<std::size_t>(p), 0);
    for (Index j = 0; j < held_out; ++j) {
        Index pos = (2 * j + 1) * p / (2 * held_out);
        while (is_held[static_cast<std::size_t>(pos)]) ++pos;  // p > held_out, so a free slot exists
        is_held[static_cast<std::size_t>(pos)] = 1;
    }
    SnapshotSet<Scalar> train, held;
    train.data.resize(s.dim(), p - held_out);
    held.data.resize(s.dim(), held_out);
    train.grid = held.grid = s.grid;
    train.regime = held.regime = s.regime;
    Index a = 0, b = 0;
    for (Index j = 0; j < p; ++j) {
        if (is_held[static_cast<std::size_t>(j)]) {
            held.data.col(b++) = s.data.col(j);
            held.times.push_back(s.times[static_cast<std::size_t>(j)]);
        } else {
            train.data.col(a++) = s.data.col(j);
            train.times.push_back(s.times[static_cast<std::size_t>(j)]);
        }
    }
    return {std::move(train), std::move(held)};
}

// Reads a snapshot matrix from disk. The file has no time metadata, so
// columns are stamped 0, 1, 2, ...
template <typename Scalar>
SnapshotSet<Scalar> ingest_snapshots(const std::string& path, bool expect_complex,
                                     std::string regime = {}) {
    MatrixHeader h = read_matrix_header(path);
    if (h.complex_field != expect_complex)
        throw IoError(path + ": field=" + std::string(h.complex_field ? "complex" : "real") +
                      " but expected " + (expect_complex ? "complex" : "real"));
    SnapshotSet<Scalar> s;
    s.data = read_matrix<Scalar>(path);
    s.times.resize(static_cast<std::size_t>(s.data.cols()));
    for (std::size_t j = 0; j < s.times.size(); ++j)
        s.times[j] = static_cast<double>(j);
    s.regime = std::move(regime);
    validate_snapshots(s);
    return s;
}

}  // namespace roms
