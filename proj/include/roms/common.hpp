#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace roms {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

template <typename Scalar>
inline constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex;

inline constexpr double pi() { return 3.14159265358979323846; }

// Error hierarchy. InvalidInput maps to CLI exit code 1, NumericalFailure
// to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class DimensionError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class IoError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Request would enumerate more work than the configured guard allows.
class GuardError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Input is structurally valid but numerically meaningless (e.g. all zero).
class DegenerateInput : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class DivergenceError : public NumericalFailure {
public:
    DivergenceError(const std::string& what, double time)
        : NumericalFailure(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

class RankDeficiencyError : public NumericalFailure {
public:
    RankDeficiencyError(const std::string& what, int step)
        : NumericalFailure(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

class ClassificationError : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

// splitmix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent generator for a (seed, a, b) triple. Streams keyed this way are
// stable under reordering of the work that consumes them.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a = 0,
                                  std::uint64_t b = 0) {
    return std::mt19937_64(mix64(mix64(mix64(seed) ^ a) ^ b));
}

}  // namespace roms
