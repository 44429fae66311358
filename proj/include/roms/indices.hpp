#pragma once

#include "roms/common.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace roms {

// Inclusive range of 1-based grid indices.
struct IndexWindow {
    int lo = 0;
    int hi = 0;

    bool valid() const { return lo >= 1 && hi >= lo; }
    int size() const { return hi - lo + 1; }
    bool contains(int i) const { return i >= lo && i <= hi; }
};

// Ordered set of distinct 1-based row indices into a state vector of
// dimension `ambient`. Order is selection order, not sorted order.
struct IndexSet {
    std::vector<int> values;
    int ambient = 0;

    int size() const { return static_cast<int>(values.size()); }

    bool contains(int i) const {
        return std::find(values.begin(), values.end(), i) != values.end();
    }

    std::vector<int> sorted() const {
        std::vector<int> s(values);
        std::sort(s.begin(), s.end());
        return s;
    }
};

inline void validate_index_set(const IndexSet& idx) {
    if (idx.ambient < 1)
        throw DimensionError("index set: ambient dimension must be >= 1");
    if (idx.values.empty())
        throw InvalidInput("index set: empty");
    for (int v : idx.values)
        if (v < 1 || v > idx.ambient)
            throw InvalidInput("index set: index " + std::to_string(v) +
                               " outside [1, " + std::to_string(idx.ambient) + "]");
    std::vector<int> s = idx.sorted();
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw InvalidInput("index set: duplicate index");
}

inline IndexSet make_index_set(std::vector<int> values, int ambient) {
    IndexSet idx{std::move(values), ambient};
    validate_index_set(idx);
    return idx;
}

// Rows of M at idx.values, in selection order. The only place 1-based
// indices meet 0-based storage.
template <typename Derived>
Matrix<typename Derived::Scalar> sample_rows(const Eigen::MatrixBase<Derived>& M,
                                             const IndexSet& idx) {
    if (M.rows() != idx.ambient)
        throw DimensionError("sample_rows: matrix rows " + std::to_string(M.rows()) +
                             " != index ambient " + std::to_string(idx.ambient));
    Matrix<typename Derived::Scalar> S(idx.size(), M.cols());
    for (int i = 0; i < idx.size(); ++i)
        S.row(i) = M.row(idx.values[static_cast<std::size_t>(i)] - 1);
    return S;
}

template <typename Scalar>
Vector<Scalar> sample_entries(const Vector<Scalar>& u, const IndexSet& idx) {
    if (u.size() != idx.ambient)
        throw DimensionError("sample_entries: vector size " + std::to_string(u.size()) +
                             " != index ambient " + std::to_string(idx.ambient));
    Vector<Scalar> s(idx.size());
    for (int i = 0; i < idx.size(); ++i)
        s[i] = u[idx.values[static_cast<std::size_t>(i)] - 1];
    return s;
}

}  // namespace roms
