#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "params.hpp"
#include "resonance.hpp"
#include "scaling.hpp"

namespace deltadrift {

// Uniform Dirichlet box [0, L]; the endpoints are hard walls.
struct Grid {
    double x_max{};  // L
    int n_points{};  // grid points including both walls
    double dx{};     // L / (n_points - 1)

    double point(int j) const { return dx * j; }
};

// L = pad * a_bar * R(t_final): the box is sized so the delta (and the decayed
// probability) stay well inside it for the whole run. Resolution rule: at
// least 16 points per resonance wavelength 2 pi / k_n.
inline Grid build_grid(const PhysicalParams& p, int n, double t_final,
                       int n_points, double pad) {
    if (!(pad > 1.0))
        throw ValidationError("pad must be > 1");
    if (n_points < 2)
        throw ValidationError("n_points must be >= 2");
    if (n < 1)
        throw ValidationError("resonance index n must be >= 1");
    const ScalingFrame<double> f{p.r0, p.v};
    const double L = pad * p.a_bar * scale_factor(f, t_final);
    Grid g;
    g.x_max = L;
    g.n_points = n_points;
    g.dx = L / (n_points - 1);
    // Finest structure: the level-n state of the initial well [0, a_bar r0],
    // whose lab wavelength is 2 pi r0 / k_n.
    const double k_n = n * std::numbers::pi / p.a_bar;
    const double wavelength = 2.0 * std::numbers::pi * p.r0 / k_n;
    if (g.dx > wavelength / 16.0) {
        std::ostringstream os;
        os << "grid under-resolved: dx = " << g.dx << " > lambda/16 = "
           << wavelength / 16.0 << " (n_points = " << n_points << ", L = " << L
           << ")";
        throw UnderResolved(os.str());
    }
    return g;
}

struct TwoChannelState {
    std::vector<std::complex<double>> phi1, phi2;
    double t = 0.0;
};

namespace detail {

inline double trapezoid_sq(const Grid& g,
                           const std::vector<std::complex<double>>& phi,
                           int j_lo, int j_hi) {
    if (j_hi <= j_lo)
        return 0.0;
    double s = 0.0;
    for (int j = j_lo; j <= j_hi; ++j)
        s += std::norm(phi[j]);
    s -= 0.5 * (std::norm(phi[j_lo]) + std::norm(phi[j_hi]));
    return s * g.dx;
}

} // namespace detail

inline double total_norm(const Grid& g, const TwoChannelState& s) {
    return detail::trapezoid_sq(g, s.phi1, 0, g.n_points - 1) +
           detail::trapezoid_sq(g, s.phi2, 0, g.n_points - 1);
}

// Norm of phi1 on [0, x_hi] (trapezoid on the covered grid points).
inline double region_norm(const Grid& g,
                          const std::vector<std::complex<double>>& phi,
                          double x_hi) {
    int j_hi = static_cast<int>(std::floor(x_hi / g.dx));
    j_hi = std::min(j_hi, g.n_points - 1);
    return detail::trapezoid_sq(g, phi, 0, j_hi);
}

// Two-channel norm beyond 0.9 L: the boundary-integrity monitor.
inline double leak_norm(const Grid& g, const TwoChannelState& s) {
    const int j_lo =
        std::max(0, static_cast<int>(std::ceil(0.9 * g.x_max / g.dx)));
    return detail::trapezoid_sq(g, s.phi1, j_lo, g.n_points - 1) +
           detail::trapezoid_sq(g, s.phi2, j_lo, g.n_points - 1);
}

// Channel 1 starts as the level-n box state of the initial well [0, a(0)];
// channel 2 starts empty. For v != 0 the state carries the velocity-field
// gauge phase exp(i mu v x^2 / (2 hbar R0)), which is what "the level-n state
// of the rescaled problem" means in lab coordinates at t = 0.
inline TwoChannelState initial_state(const Grid& g, const PhysicalParams& p,
                                     int n) {
    const double a0 = p.a_bar * p.r0;
    if (!(a0 < g.x_max))
        throw ValidationError("initial well a(0) does not fit inside the grid");
    TwoChannelState s;
    s.phi1.assign(g.n_points, {0.0, 0.0});
    s.phi2.assign(g.n_points, {0.0, 0.0});
    s.t = 0.0;
    const std::complex<double> i{0.0, 1.0};
    for (int j = 0; j < g.n_points; ++j) {
        const double x = g.point(j);
        if (x >= a0)
            break;
        std::complex<double> amp =
            std::sqrt(2.0 / a0) * std::sin(n * std::numbers::pi * x / a0);
        if (p.v != 0.0)
            amp *= std::exp(i * (p.mu * p.v * x * x / (2.0 * p.hbar * p.r0)));
        s.phi1[j] = amp;
    }
    const double nrm = std::sqrt(total_norm(g, s));
    for (auto& c : s.phi1)
        c /= nrm;
    return s;
}

namespace detail {

// Normalized Gaussian stand-in for the delta: truncated at +-6w and rescaled
// so its trapezoid integral on this grid is exactly 1.
inline std::vector<double> delta_profile(const Grid& g, double center, double w) {
    if (!(w >= 2.0 * g.dx))
        throw ValidationError("regularization width w must be >= 2 dx");
    std::vector<double> prof(g.n_points, 0.0);
    const int j_lo = std::max(0, static_cast<int>(std::ceil((center - 6.0 * w) / g.dx)));
    const int j_hi = std::min(g.n_points - 1,
                              static_cast<int>(std::floor((center + 6.0 * w) / g.dx)));
    double sum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double u = (g.point(j) - center) / w;
        prof[j] = std::exp(-0.5 * u * u);
        sum += prof[j];
    }
    sum -= 0.5 * (prof[0] + prof[g.n_points - 1]);
    const double integral = sum * g.dx;
    if (!(integral > 0.0))
        throw ValidationError("delta profile vanished: center outside the grid?");
    for (int j = j_lo; j <= j_hi; ++j)
        prof[j] /= integral;
    return prof;
}

} // namespace detail

// Off-diagonal coupling row: (u0_bar / R(t)) * N_w(x - a(t)), a(t) = a_bar R(t).
inline std::vector<double> coupling_profile(const Grid& g, const PhysicalParams& p,
                                            double t, double w) {
    const ScalingFrame<double> f{p.r0, p.v};
    const double r = scale_factor(f, t);
    auto prof = detail::delta_profile(g, p.a_bar * r, w);
    const double coeff = p.u0_bar / r;
    for (auto& x : prof)
        x *= coeff;
    return prof;
}

// Diagonal effective potential used when v0_override is set: the reduced
// single-channel model (V0 / R(t)) * N_w(x - a(t)). In the rescaled frame this
// is a static delta of strength V0 at a_bar.
inline std::vector<double> effective_potential(const Grid& g, const PhysicalParams& p,
                                               double t, double w) {
    if (!p.v0_override)
        throw ValidationError("effective_potential needs v0_override");
    const ScalingFrame<double> f{p.r0, p.v};
    const double r = scale_factor(f, t);
    auto prof = detail::delta_profile(g, p.a_bar * r, w);
    const double coeff = *p.v0_override / r;
    for (auto& x : prof)
        x *= coeff;
    return prof;
}

namespace detail {

// Crank-Nicolson half: (1 + z H) phi' = (1 - z H) phi with z = i dt / (2 hbar),
// H = -(hbar^2 / 2 mu) d2/dx2 + V(x). Dirichlet walls at both ends. The solve
// is a complex Thomas sweep; unitary up to roundoff since H is Hermitian.
inline void cn_sweep(const Grid& g, const PhysicalParams& p,
                     std::vector<std::complex<double>>& phi,
                     const std::vector<double>* vdiag, double voffset, double dt) {
    const int n = g.n_points;
    if (n < 3) {
        phi.assign(n, {0.0, 0.0});
        return;
    }
    const double kin = p.hbar * p.hbar / (2.0 * p.mu * g.dx * g.dx);
    const std::complex<double> z{0.0, dt / (2.0 * p.hbar)};
    const std::complex<double> off = -z * kin;

    static thread_local std::vector<std::complex<double>> diag, rhs, scratch;
    diag.resize(n);
    rhs.resize(n);
    scratch.resize(n);

    for (int j = 1; j < n - 1; ++j) {
        const double vj = voffset + (vdiag ? (*vdiag)[j] : 0.0);
        const std::complex<double> h_main = 2.0 * kin + vj;
        diag[j] = 1.0 + z * h_main;
        rhs[j] = (1.0 - z * h_main) * phi[j] - off * (phi[j - 1] + phi[j + 1]);
    }
    phi[0] = phi[n - 1] = {0.0, 0.0};

    // Thomas forward sweep on the interior block.
    scratch[1] = off / diag[1];
    rhs[1] /= diag[1];
    for (int j = 2; j < n - 1; ++j) {
        const std::complex<double> m = diag[j] - off * scratch[j - 1];
        scratch[j] = off / m;
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / m;
    }
    phi[n - 2] = rhs[n - 2];
    for (int j = n - 3; j >= 1; --j)
        phi[j] = rhs[j] - scratch[j] * phi[j + 1];
}

} // namespace detail

// One Strang-split step of the coupled system, all pieces evaluated at the
// midpoint time: per-channel Crank-Nicolson half-steps for the kinetic +
// diagonal parts, sandwiching an exact local 2x2 rotation for the off-diagonal
// coupling. With v0_override the coupling is bypassed and the effective delta
// rides inside channel 1's diagonal instead.
inline void step(const Grid& g, TwoChannelState& s, const PhysicalParams& p,
                 double dt, double w) {
    if (!(dt > 0.0))
        throw ValidationError("step needs dt > 0");
    const double tm = s.t + 0.5 * dt;
    const ScalingFrame<double> f{p.r0, p.v};
    const double r = scale_factor(f, tm);
    const double center = p.a_bar * r;
    const bool reduced = p.v0_override.has_value();
    if ((reduced || p.u0_bar != 0.0) && center + 6.0 * w >= g.x_max)
        throw DomainExceeded("delta support reached the box wall");

    const double norm_before = total_norm(g, s);

    std::vector<double> diag1;
    if (reduced)
        diag1 = effective_potential(g, p, tm, w);

    detail::cn_sweep(g, p, s.phi1, reduced ? &diag1 : nullptr, 0.0, 0.5 * dt);
    detail::cn_sweep(g, p, s.phi2, nullptr, p.v2_offset, 0.5 * dt);

    if (!reduced && p.u0_bar != 0.0) {
        const auto c = coupling_profile(g, p, tm, w);
        const std::complex<double> i{0.0, 1.0};
        for (int j = 1; j < g.n_points - 1; ++j) {
            if (c[j] == 0.0)
                continue;
            const double theta = c[j] * dt / p.hbar;
            const double co = std::cos(theta), si = std::sin(theta);
            const auto a = s.phi1[j], b = s.phi2[j];
            s.phi1[j] = co * a - i * si * b;
            s.phi2[j] = co * b - i * si * a;
        }
    }

    detail::cn_sweep(g, p, s.phi1, reduced ? &diag1 : nullptr, 0.0, 0.5 * dt);
    detail::cn_sweep(g, p, s.phi2, nullptr, p.v2_offset, 0.5 * dt);

    s.t += dt;
    const double norm_after = total_norm(g, s);
    if (std::abs(norm_after - norm_before) > 1e-6) {
        std::ostringstream os;
        os << "norm drifted by " << norm_after - norm_before
           << " in one step at t = " << s.t;
        throw SolverDiverged(os.str());
    }
}

// P(t): channel-1 probability still inside the (moving) well [0, a(t)],
// normalized by the t = 0 content norm0 of the same integral.
inline double survival_numeric(const Grid& g, const TwoChannelState& s,
                               const PhysicalParams& p, double norm0) {
    const ScalingFrame<double> f{p.r0, p.v};
    const double a_t = p.a_bar * scale_factor(f, s.t);
    if (!(a_t < g.x_max))
        throw DomainExceeded("a(t) reached the box wall");
    if (!(norm0 > 0.0))
        throw ValidationError("survival_numeric needs norm0 > 0");
    return region_norm(g, s.phi1, a_t) / norm0;
}

struct DecaySample {
    double t{}, tau{}, p_numeric{}, p_analytic{};
};

struct FitResult {
    double rate{};
    double intercept{};
    double r_squared{};
    int n_used{};
};

// Default window: drop the leading 10% of the tau range (initial transient),
// stop at the first sample with P < 0.1 (background contamination).
inline std::pair<double, double> default_fit_window(const std::vector<DecaySample>& samples) {
    if (samples.empty())
        throw InsufficientSamples("no samples to fit");
    const double tau_first = samples.front().tau;
    double tau_last = samples.back().tau;
    for (const auto& s : samples) {
        if (s.p_numeric < 0.1) {
            tau_last = s.tau;
            break;
        }
    }
    const double tau_lo = tau_first + 0.1 * (samples.back().tau - tau_first);
    return {tau_lo, tau_last};
}

// Least-squares slope of -ln P against tau over the window: the measured
// decay rate, directly comparable with the analytic 2|H/D|/hbar.
inline FitResult fit_decay_rate(const std::vector<DecaySample>& samples,
                                std::pair<double, double> window) {
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        if (s.tau < window.first || s.tau > window.second)
            continue;
        if (!(s.p_numeric > 0.0))
            throw ValidationError("fit window contains a non-positive P sample");
        xs.push_back(s.tau);
        ys.push_back(-std::log(s.p_numeric));
    }
    const int m = static_cast<int>(xs.size());
    if (m < 10) {
        std::ostringstream os;
        os << "fit window [" << window.first << ", " << window.second
           << "] holds " << m << " samples; need >= 10";
        throw InsufficientSamples(os.str());
    }
    double sx = 0, sy = 0;
    for (int i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    FitResult fit;
    fit.n_used = m;
    fit.rate = (sxx > 0.0) ? sxy / sxx : 0.0;
    fit.intercept = my - fit.rate * mx;
    double ss_res = 0, ss_tot = 0;
    for (int i = 0; i < m; ++i) {
        const double yh = fit.intercept + fit.rate * xs[i];
        ss_res += (ys[i] - yh) * (ys[i] - yh);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

struct DecayCurve {
    std::vector<DecaySample> samples;
    double fitted_rate{};
    double r_squared{};
    std::pair<double, double> fit_window{};
};

} // namespace deltadrift
