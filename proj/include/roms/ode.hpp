#pragma once

#include "roms/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace roms {

// Dormand-Prince 5(4) tableau. The last stage row equals the 5th order
// weights (FSAL), so an accepted step hands its final evaluation to the next
// step for free.
namespace dp5 {

inline constexpr int stages = 7;

inline constexpr double c[stages] = {0.0,       1.0 / 5,  3.0 / 10, 4.0 / 5,
                                     8.0 / 9.0, 1.0,      1.0};

inline constexpr double a[stages][stages] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};

// 5th order weights (propagated) and the difference to the embedded 4th
// order solution, used for the error estimate.
inline constexpr double b[stages] = {35.0 / 384,    0.0,        500.0 / 1113,
                                     125.0 / 192,   -2187.0 / 6784,
                                     11.0 / 84,     0.0};

inline constexpr double e[stages] = {71.0 / 57600,   0.0,
                                     -71.0 / 16695,  71.0 / 1920,
                                     -17253.0 / 339200, 22.0 / 525,
                                     -1.0 / 40};

inline constexpr double order = 5.0;

}  // namespace dp5

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 0.0;   // 0 = pick automatically
    double h_min = 0.0;    // 0 = 16 eps of the span
    long max_steps = 10'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

// Weighted RMS of the error estimate against atol + rtol * max(|y0|, |y1|),
// componentwise; a value <= 1 accepts the step.
template <typename Scalar>
double wrms_error(const Vector<Scalar>& err, const Vector<Scalar>& y0,
                  const Vector<Scalar>& y1, double rtol, double atol) {
    double sum = 0.0;
    for (Index i = 0; i < err.size(); ++i) {
        double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double q = std::abs(err[i]) / scale;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

namespace detail {

inline double initial_step_heuristic(double span, double y_norm, double f_norm,
                                     double rtol) {
    double h = 1e-2 * span;
    if (f_norm > 0.0) h = std::min(h, std::pow(rtol, 0.2) * (1.0 + y_norm) / f_norm);
    return std::max(h, 1e-12 * span);
}

}  // namespace detail

// Adaptive 5(4) integration of y' = rhs(t, y) from t0 to t1 (t1 > t0).
// rhs must return a vector of the same dimension. Throws DivergenceError if
// the controller runs out of steps or the step size underflows, which is how
// a finite-time blow-up surfaces.
template <typename Scalar, typename Rhs>
Vector<Scalar> integrate_adaptive(Rhs&& rhs, Vector<Scalar> y, double t0, double t1,
                                  const OdeOptions& opts, OdeStats* stats = nullptr) {
    if (!(t1 > t0)) throw InvalidInput("integrate: t1 must exceed t0");
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
        throw ConfigError("integrate: tolerances must be positive");
    const double span = t1 - t0;
    const double h_min =
        opts.h_min > 0.0 ? opts.h_min : 16.0 * std::numeric_limits<double>::epsilon() * span;

    OdeStats local;
    OdeStats& st = stats ? *stats : local;

    std::vector<Vector<Scalar>> K(dp5::stages);
    double t = t0;
    K[0] = rhs(t, y);
    ++st.rhs_evals;
    if (K[0].size() != y.size())
        throw DimensionError("integrate: rhs dimension != state dimension");

    double h = opts.h_init > 0.0
                   ? opts.h_init
                   : detail::initial_step_heuristic(span, y.norm(), K[0].norm(), opts.rtol);
    h = std::min(h, span);

    Vector<Scalar> y1, err;
    while (t < t1) {
        if (st.accepted + st.rejected >= opts.max_steps)
            throw DivergenceError("integrate: step limit reached", t);
        if (!(h >= h_min)) throw DivergenceError("integrate: step size underflow", t);
        bool clipped = t + h >= t1;
        double h_eff = clipped ? t1 - t : h;

        for (int i = 1; i < dp5::stages; ++i) {
            Vector<Scalar> yi = y;
            for (int j = 0; j < i; ++j)
                if (dp5::a[i][j] != 0.0) yi += (h_eff * dp5::a[i][j]) * K[j];
            K[i] = rhs(t + dp5::c[i] * h_eff, yi);
            ++st.rhs_evals;
        }

        y1 = y;
        for (int j = 0; j < dp5::stages; ++j)
            if (dp5::b[j] != 0.0) y1 += (h_eff * dp5::b[j]) * K[j];
        err = h_eff * dp5::e[0] * K[0];
        for (int j = 1; j < dp5::stages; ++j)
            if (dp5::e[j] != 0.0) err += (h_eff * dp5::e[j]) * K[j];

        double norm = wrms_error(err, y, y1, opts.rtol, opts.atol);
        if (!std::isfinite(norm)) {
            ++st.rejected;
            h = 0.5 * h_eff;
            continue;
        }
        if (norm <= 1.0) {
            ++st.accepted;
            t = clipped ? t1 : t + h_eff;
            y.swap(y1);
            K[0] = K[dp5::stages - 1];  // FSAL
            double grow = 0.9 * std::pow(std::max(norm, 1e-10), -1.0 / dp5::order);
            h = h_eff * std::clamp(grow, 0.2, 5.0);
        } else {
            ++st.rejected;
            double shrink = 0.9 * std::pow(norm, -1.0 / dp5::order);
            h = h_eff * std::clamp(shrink, 0.2, 0.9);
        }
    }
    return y;
}

// States at each requested time, integrating segment by segment. times must
// start at t0 and increase strictly; the first entry maps to y0 itself.
template <typename Scalar, typename Rhs>
std::vector<Vector<Scalar>> integrate_at_times(Rhs&& rhs, const Vector<Scalar>& y0,
                                               const std::vector<double>& times,
                                               const OdeOptions& opts,
                                               OdeStats* stats = nullptr) {
    if (times.size() < 2) throw InvalidInput("integrate: need at least two times");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidInput("integrate: times must increase strictly");
    std::vector<Vector<Scalar>> out;
    out.reserve(times.size());
    out.push_back(y0);
    for (std::size_t i = 1; i < times.size(); ++i)
        out.push_back(integrate_adaptive(rhs, out.back(), times[i - 1], times[i], opts,
                                         stats));
    return out;
}

}  // namespace roms
