#pragma once

#include "roms/common.hpp"
#include "roms/ode.hpp"
#include "roms/snapshots.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace roms {

using Cplx = std::complex<double>;

// Coefficients of the cubic-quintic Ginzburg-Landau equation, written with
// time isolated:
//   U_t = (tau + i/2) U_xx + kappa U_xxxx
//       + (mu + i)|U|^2 U + (epsilon + i nu)|U|^4 U + gamma U.
// nonlinear_scale multiplies the cubic and quintic terms; 0 turns the
// equation into its linear part, which has a closed-form solution used by
// the tests.
struct GLParams {
    double tau = 0.0;
    double kappa = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    double epsilon = 0.0;
    double gamma = 0.0;
    double nonlinear_scale = 1.0;

    Cplx cubic() const { return {mu, 1.0}; }
    Cplx quintic() const { return {epsilon, nu}; }
};

inline void validate_params(const GLParams& p) {
    for (double v : {p.tau, p.kappa, p.mu, p.nu, p.epsilon, p.gamma, p.nonlinear_scale})
        if (!std::isfinite(v)) throw ConfigError("cqgle: non-finite parameter");
}

// The six standard parameter sets, keyed b1..b6.
inline GLParams regime_params(const std::string& id) {
    //                tau    kappa   mu    nu    eps   gamma
    if (id == "b1") return {-0.3, -0.05, 1.45, 0.0, -0.1, -0.5};
    if (id == "b2") return {-0.3, -0.05, 1.4, 0.0, -0.1, -0.5};
    if (id == "b3") return {0.08, 0.0, 0.66, -0.1, -0.1, -0.1};
    if (id == "b4") return {0.125, 0.0, 1.0, -0.6, -0.1, -0.1};
    if (id == "b5") return {0.08, -0.05, 0.6, -0.1, -0.1, -0.1};
    if (id == "b6") return {0.08, -0.05, 0.5, -0.1, -0.1, -0.1};
    throw ConfigError("cqgle: unknown regime '" + id + "' (expected b1..b6)");
}

inline const std::vector<std::string>& regime_names() {
    static const std::vector<std::string> names{"b1", "b2", "b3", "b4", "b5", "b6"};
    return names;
}

struct InitialCondition {
    std::string profile = "sech";  // sech | gaussian | single_mode | noisy_sech
    double amplitude = 1.0;
    int mode = 4;  // wavenumber index, single_mode only
};

struct GLDomain {
    double x_min = -20.0;
    double x_max = 20.0;
    Index n = 1024;
    double t_final = 40.0;
    int snapshot_count = 201;
    InitialCondition initial;
};

inline void validate_domain(const GLDomain& d) {
    if (!(d.x_max > d.x_min)) throw ConfigError("cqgle: x_max must exceed x_min");
    if (d.n < 64 || (d.n & (d.n - 1)) != 0)
        throw ConfigError("cqgle: n must be a power of two >= 64");
    if (!(d.t_final > 0.0)) throw ConfigError("cqgle: t_final must be positive");
    if (d.snapshot_count < 2) throw ConfigError("cqgle: need at least two snapshots");
    if (!(std::isfinite(d.initial.amplitude)) || d.initial.amplitude == 0.0)
        throw ConfigError("cqgle: initial amplitude must be finite and nonzero");
    if (std::abs(d.initial.mode) >= d.n / 2)
        throw ConfigError("cqgle: initial mode outside the resolved band");
    const std::string& p = d.initial.profile;
    if (p != "sech" && p != "gaussian" && p != "single_mode" && p != "noisy_sech")
        throw ConfigError("cqgle: unknown initial profile '" + p + "'");
}

// Periodic grid x_j = x_min + j dx and the matching FFT wavenumber layout
// [0..n/2-1, -n/2..-1] scaled by 2 pi / L.
struct SpectralGrid {
    std::vector<double> x;
    Vector<double> k;
    double dx = 0.0;
    double length = 0.0;
};

inline SpectralGrid make_grid(const GLDomain& d) {
    SpectralGrid g;
    g.length = d.x_max - d.x_min;
    g.dx = g.length / static_cast<double>(d.n);
    g.x.resize(static_cast<std::size_t>(d.n));
    for (Index j = 0; j < d.n; ++j)
        g.x[static_cast<std::size_t>(j)] = d.x_min + static_cast<double>(j) * g.dx;
    g.k.resize(d.n);
    const double dk = 2.0 * pi() / g.length;
    for (Index m = 0; m < d.n; ++m) {
        Index signed_m = m < d.n / 2 ? m : m - d.n;
        g.k[m] = dk * static_cast<double>(signed_m);
    }
    return g;
}

// Diagonal spectral symbol of the linear part: -(tau + i/2) k^2 + kappa k^4
// + gamma.
inline Vector<Cplx> linear_symbol(const GLParams& p, const Vector<double>& k) {
    Vector<Cplx> lam(k.size());
    const Cplx second(-p.tau, -0.5);
    for (Index m = 0; m < k.size(); ++m) {
        double k2 = k[m] * k[m];
        lam[m] = second * k2 + p.kappa * k2 * k2 + p.gamma;
    }
    return lam;
}

// Pointwise cubic-quintic terms in physical space.
inline void nonlinear_term(const Vector<Cplx>& u, const GLParams& p, Vector<Cplx>& out) {
    const Cplx c3 = p.nonlinear_scale * p.cubic();
    const Cplx c5 = p.nonlinear_scale * p.quintic();
    out.resize(u.size());
    for (Index j = 0; j < u.size(); ++j) {
        double a2 = std::norm(u[j]);
        out[j] = (c3 * a2 + c5 * (a2 * a2)) * u[j];
    }
}

// Forward/backward transforms with the forward direction normalized by 1/n,
// so mode amplitudes are grid-size independent. Plans are created once with
// FFTW_ESTIMATE | FFTW_UNALIGNED and reused on scratch arrays.
class Fft {
public:
    explicit Fft(Index n) : n_(n), buf_(n) {
        auto* b = reinterpret_cast<fftw_complex*>(buf_.data());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), b, b, FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), b, b, FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw NumericalFailure("cqgle: FFT plan creation failed");
    }
    ~Fft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    Index size() const { return n_; }

    void to_spectral(const Vector<Cplx>& u, Vector<Cplx>& u_hat) const {
        u_hat = u;
        auto* b = reinterpret_cast<fftw_complex*>(u_hat.data());
        fftw_execute_dft(fwd_, b, b);
        u_hat *= 1.0 / static_cast<double>(n_);
    }
    void to_physical(const Vector<Cplx>& u_hat, Vector<Cplx>& u) const {
        u = u_hat;
        auto* b = reinterpret_cast<fftw_complex*>(u.data());
        fftw_execute_dft(bwd_, b, b);
    }
    Vector<Cplx> to_spectral(const Vector<Cplx>& u) const {
        Vector<Cplx> u_hat;
        to_spectral(u, u_hat);
        return u_hat;
    }
    Vector<Cplx> to_physical(const Vector<Cplx>& u_hat) const {
        Vector<Cplx> u;
        to_physical(u_hat, u);
        return u;
    }

private:
    Index n_;
    Vector<Cplx> buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

// Full right-hand side in spectral space: symbol * u_hat + FFT of the
// pointwise nonlinearity. Usable directly with the generic integrator; the
// production stepper below splits the two parts instead.
class GLRhs {
public:
    GLRhs(const GLParams& params, const GLDomain& domain)
        : params_(params), fft_(domain.n) {
        validate_params(params);
        validate_domain(domain);
        symbol_ = linear_symbol(params, make_grid(domain).k);
    }

    const Vector<Cplx>& symbol() const { return symbol_; }

    Vector<Cplx> operator()(double t, const Vector<Cplx>& u_hat) {
        fft_.to_physical(u_hat, u_);
        if (!u_.allFinite())
            throw DivergenceError("cqgle: non-finite state in rhs", t);
        nonlinear_term(u_, params_, n_);
        fft_.to_spectral(n_, n_hat_);
        return symbol_.cwiseProduct(u_hat) + n_hat_;
    }

private:
    GLParams params_;
    Fft fft_;
    Vector<Cplx> symbol_, u_, n_, n_hat_;
};

inline Vector<Cplx> initial_state(const GLDomain& d, const SpectralGrid& g,
                                  std::uint64_t seed) {
    Vector<Cplx> u(d.n);
    const double A = d.initial.amplitude;
    if (d.initial.profile == "single_mode") {
        double km = 2.0 * pi() / g.length * static_cast<double>(d.initial.mode);
        for (Index j = 0; j < d.n; ++j) {
            double ph = km * g.x[static_cast<std::size_t>(j)];
            u[j] = A * Cplx(std::cos(ph), std::sin(ph));
        }
        return u;
    }
    for (Index j = 0; j < d.n; ++j) {
        double x = g.x[static_cast<std::size_t>(j)];
        double env = d.initial.profile == "gaussian" ? std::exp(-x * x)
                                                     : 1.0 / std::cosh(x);
        u[j] = A * env;
    }
    if (d.initial.profile == "noisy_sech") {
        std::mt19937_64 rng = rng_stream(seed);
        std::normal_distribution<double> dist(0.0, 1e-3);
        for (Index j = 0; j < d.n; ++j) u[j] *= 1.0 + dist(rng);
    }
    return u;
}

namespace detail {

// Integrating-factor form of the embedded 5(4) pair: with v = exp(-lambda t)
// u_hat the stages become plain Runge-Kutta stages whose coefficients carry
// exp(lambda theta h) weights at fixed non-negative multiples theta of the
// step. All distinct multiples are tabulated once per step size.
class IfTableau {
public:
    IfTableau() {
        for (int i = 1; i < dp5::stages; ++i) {
            stage_base_[i] = intern(dp5::c[i]);
            for (int j = 0; j < i; ++j)
                if (dp5::a[i][j] != 0.0) stage_a_[i][j] = intern(dp5::c[i] - dp5::c[j]);
        }
        full_ = intern(1.0);
        for (int j = 0; j < dp5::stages; ++j)
            if (dp5::b[j] != 0.0 || dp5::e[j] != 0.0)
                combine_[j] = intern(1.0 - dp5::c[j]);
    }

    int theta_count() const { return static_cast<int>(thetas_.size()); }
    double theta(int q) const { return thetas_[static_cast<std::size_t>(q)]; }
    int stage_base(int i) const { return stage_base_[i]; }
    int stage_a(int i, int j) const { return stage_a_[i][j]; }
    int combine(int j) const { return combine_[j]; }
    int full() const { return full_; }

private:
    int intern(double theta) {
        for (std::size_t q = 0; q < thetas_.size(); ++q)
            if (thetas_[q] == theta) return static_cast<int>(q);
        thetas_.push_back(theta);
        return static_cast<int>(thetas_.size() - 1);
    }

    std::vector<double> thetas_;
    int stage_base_[dp5::stages] = {};
    int stage_a_[dp5::stages][dp5::stages] = {};
    int combine_[dp5::stages] = {};
    int full_ = 0;
};

inline const IfTableau& if_tableau() {
    static const IfTableau t;
    return t;
}

}  // namespace detail

// Exponential-weight tables exp(lambda * theta * h) for one step size.
class IfStepper {
public:
    IfStepper(Vector<Cplx> lambda, const GLParams& params, Index n)
        : lambda_(std::move(lambda)), params_(params), fft_(n) {
        for (auto& k : K_) k.resize(n);
    }

    const Fft& fft() const { return fft_; }

    void seed_state(const Vector<Cplx>& u_hat) {
        fft_.to_physical(u_hat, u_work_);
        nonlinear_term(u_work_, params_, n_work_);
        fft_.to_spectral(n_work_, K_[0]);
    }

    // One attempted step of size h from u_hat; fills u_next and the scaled
    // error estimate. K_[0] must hold the nonlinearity spectrum at u_hat
    // (seed_state or the previous accepted step). Returns the WRMS error.
    double attempt(const Vector<Cplx>& u_hat, double h, Vector<Cplx>& u_next,
                   Vector<Cplx>& err) {
        const auto& tab = detail::if_tableau();
        const Tables& T = tables(h);

        for (int i = 1; i < dp5::stages; ++i) {
            stage_ = T.at(tab.stage_base(i)).cwiseProduct(u_hat);
            for (int j = 0; j < i; ++j)
                if (dp5::a[i][j] != 0.0)
                    stage_ += (h * dp5::a[i][j]) *
                              T.at(tab.stage_a(i, j)).cwiseProduct(K_[j]);
            fft_.to_physical(stage_, u_work_);
            nonlinear_term(u_work_, params_, n_work_);
            fft_.to_spectral(n_work_, K_[static_cast<std::size_t>(i)]);
        }

        u_next = T.at(tab.full()).cwiseProduct(u_hat);
        err.setZero(u_hat.size());
        for (int j = 0; j < dp5::stages; ++j) {
            if (dp5::b[j] != 0.0)
                u_next += (h * dp5::b[j]) * T.at(tab.combine(j)).cwiseProduct(K_[j]);
            if (dp5::e[j] != 0.0)
                err += (h * dp5::e[j]) * T.at(tab.combine(j)).cwiseProduct(K_[j]);
        }
        return wrms_error(err, u_hat, u_next, rtol, atol);
    }

    // The last stage of an accepted step is the nonlinearity at the new
    // state; promoting it to K_[0] is the FSAL handoff.
    void accept() { K_[0].swap(K_[dp5::stages - 1]); }

    double rtol = 1e-8;
    double atol = 1e-10;

private:
    using Tables = std::vector<Vector<Cplx>>;

    const Tables& tables(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        const auto& tab = detail::if_tableau();
        Tables T(static_cast<std::size_t>(tab.theta_count()));
        for (int q = 0; q < tab.theta_count(); ++q) {
            double theta = tab.theta(q);
            Vector<Cplx>& e = T[static_cast<std::size_t>(q)];
            e.resize(lambda_.size());
            for (Index m = 0; m < lambda_.size(); ++m)
                e[m] = std::exp(lambda_[m] * (theta * h));
        }
        return cache_.emplace(h, std::move(T)).first->second;
    }

    Vector<Cplx> lambda_;
    GLParams params_;
    Fft fft_;
    std::array<Vector<Cplx>, dp5::stages> K_;
    Vector<Cplx> stage_, u_work_, n_work_;
    std::map<double, Tables> cache_;
};

// Columnwise action of the linear part, diagonal in Fourier space. Feeds the
// reduced-model assembly without ever forming the n x n matrix.
class SpectralLinearAction {
public:
    SpectralLinearAction(const GLParams& params, const GLDomain& domain)
        : fft_(domain.n) {
        validate_params(params);
        validate_domain(domain);
        symbol_ = linear_symbol(params, make_grid(domain).k);
    }

    Matrix<Cplx> operator()(const Matrix<Cplx>& M) const {
        if (M.rows() != symbol_.size())
            throw DimensionError("cqgle: operator applied to wrong dimension");
        Matrix<Cplx> out(M.rows(), M.cols());
        Vector<Cplx> col, col_hat;
        for (Index j = 0; j < M.cols(); ++j) {
            fft_.to_spectral(Vector<Cplx>(M.col(j)), col_hat);
            col_hat.array() *= symbol_.array();
            fft_.to_physical(col_hat, col);
            out.col(j) = col;
        }
        return out;
    }

private:
    Fft fft_;
    Vector<Cplx> symbol_;
};

// The cubic-quintic terms as a pointwise map on sampled state values; this
// is the function handed to the reduced time loop.
inline auto pointwise_nonlinearity(const GLParams& params) {
    return [params](const Vector<Cplx>& u) {
        Vector<Cplx> out;
        nonlinear_term(u, params, out);
        return out;
    };
}

struct SimulateOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    std::string regime;  // label stamped on the snapshot set
};

// Spectral solve of the full equation. Steps tile each snapshot interval
// with dt / 2^m substeps, halving on rejection and doubling at even substep
// boundaries when the error estimate has a margin of 2^5, so every visited
// step size reuses one cached table set and output times are hit exactly.
inline SnapshotSet<Cplx> simulate(const GLParams& params, const GLDomain& domain,
                                  std::uint64_t seed = 0,
                                  const SimulateOptions& opts = {}) {
    validate_params(params);
    validate_domain(domain);
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
        throw ConfigError("cqgle: tolerances must be positive");

    SpectralGrid grid = make_grid(domain);
    IfStepper stepper(linear_symbol(params, grid.k), params, domain.n);
    stepper.rtol = opts.rtol;
    stepper.atol = opts.atol;

    const int p = domain.snapshot_count;
    const double dt = domain.t_final / static_cast<double>(p - 1);
    SnapshotSet<Cplx> out;
    out.data.resize(domain.n, p);
    out.times.resize(static_cast<std::size_t>(p));
    out.grid = grid.x;
    out.regime = opts.regime;

    Vector<Cplx> u = initial_state(domain, grid, seed);
    out.data.col(0) = u;
    out.times[0] = 0.0;

    Vector<Cplx> u_hat = stepper.fft().to_spectral(u);
    stepper.seed_state(u_hat);

    constexpr int max_level = 48;
    int level = 0;
    Vector<Cplx> u_next, err;
    for (int snap = 1; snap < p; ++snap) {
        long sub = 0;
        long total = 1L << level;
        while (sub < total) {
            double t_now = dt * (static_cast<double>(snap - 1) +
                                 static_cast<double>(sub) / static_cast<double>(total));
            if (level >= max_level)
                throw DivergenceError("cqgle: step size underflow", t_now);
            double h = dt / static_cast<double>(total);
            double norm = stepper.attempt(u_hat, h, u_next, err);
            if (!std::isfinite(norm) || norm > 1.0) {
                ++level;
                sub *= 2;
                total *= 2;
                continue;
            }
            u_hat.swap(u_next);
            stepper.accept();
            ++sub;
            if (norm < 0.02 && level > 0 && sub % 2 == 0 && (total - sub) % 2 == 0) {
                --level;
                sub /= 2;
                total /= 2;
            }
        }
        stepper.fft().to_physical(u_hat, u);
        if (!u.allFinite())
            throw DivergenceError("cqgle: non-finite state", dt * snap);
        out.data.col(snap) = u;
        out.times[static_cast<std::size_t>(snap)] = dt * snap;
    }
    return out;
}

}  // namespace roms
