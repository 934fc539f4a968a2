#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "params.hpp"
#include "scaling.hpp"

namespace deltadrift {

// Derived per-level quantities of the effective single-channel delta model:
// the quasi-bound level n of the box [0, a_bar] leaking through the delta.
template <class Real = double>
struct BasicResonanceParams {
    int n{};            // level index (>= 1)
    Real k_bar_n{};     // n pi / a_bar
    Real e_bar_n{};     // hbar^2 k_n^2 / (2 mu)
    Real v0_bar{};      // effective strength actually used
    Real g{};           // 2 mu v0_bar / (hbar^2 k_n), the dimensionless coupling
    Real d_sq{};        // Lorentzian curvature (mu a / (hbar^2 k_n))^2 (1 + g^2)
    Real h_sq{};        // Lorentzian floor 1 / (1 + g^2)
    Real delta_shift{}; // resonance shift (2 v0_bar / a_bar) / (1 + g^2)
};

using ResonanceParams = BasicResonanceParams<double>;

// Diagonal Green's function of the flat second surface at the delta position,
// closed channel only: G = -mu / (hbar^2 kappa), kappa = sqrt(2 mu (V2 - E)) / hbar.
// Real and negative, so the effective strength u0^2 G is always attractive.
template <class Real>
Real greens_second_channel(const BasicPhysicalParams<Real>& p, Real energy) {
    if (p.v0_override)
        throw ValidationError(
            "v0_override is set; the Green's-function path is bypassed");
    if (!(p.v2_offset > energy)) {
        std::ostringstream os;
        os << "open channel: E = " << energy << " >= V2 = " << p.v2_offset
           << "; G would be complex. Supply v0_override instead.";
        throw OpenChannel(os.str());
    }
    using std::sqrt;
    const Real kappa = sqrt(Real(2) * p.mu * (p.v2_offset - energy)) / p.hbar;
    return -p.mu / (p.hbar * p.hbar * kappa);
}

// Effective single-channel strength: the override when present, otherwise the
// second channel folded in through its Green's function, V0 = u0^2 G.
template <class Real>
Real effective_strength(const BasicPhysicalParams<Real>& p, Real energy) {
    if (p.v0_override)
        return *p.v0_override;
    return p.u0_bar * p.u0_bar * greens_second_channel(p, energy);
}

// Squared outside amplitude of the scattering state regular at the origin:
//   A^2(k) = sin^2(k a) + (cos(k a) + q sin(k a))^2,  q = 2 mu v0 / (hbar^2 k).
// Equals 1 whenever the delta decouples (v0 = 0 or k a = n pi).
template <class Real>
Real amplitude_sq(const BasicPhysicalParams<Real>& p, Real v0_bar, Real k_bar) {
    if (!(k_bar > Real(0)))
        throw NonPositiveParameter("amplitude_sq needs k_bar > 0");
    using std::cos;
    using std::sin;
    const Real s = sin(k_bar * p.a_bar);
    const Real c = cos(k_bar * p.a_bar);
    const Real q = Real(2) * p.mu * v0_bar / (p.hbar * p.hbar * k_bar);
    const Real outer = c + q * s;
    return s * s + outer * outer;
}

template <class Real>
BasicResonanceParams<Real> resonance_params(const BasicPhysicalParams<Real>& p, int n) {
    if (n < 1)
        throw ValidationError("resonance index n must be >= 1");
    BasicResonanceParams<Real> r;
    r.n = n;
    r.k_bar_n = Real(n) * std::numbers::pi_v<Real> / p.a_bar;
    r.e_bar_n = p.hbar * p.hbar * r.k_bar_n * r.k_bar_n / (Real(2) * p.mu);
    r.v0_bar = effective_strength(p, r.e_bar_n);
    r.g = Real(2) * p.mu * r.v0_bar / (p.hbar * p.hbar * r.k_bar_n);
    const Real one_plus_g2 = Real(1) + r.g * r.g;
    const Real base = p.mu * p.a_bar / (p.hbar * p.hbar * r.k_bar_n);
    r.d_sq = base * base * one_plus_g2;
    r.h_sq = Real(1) / one_plus_g2;
    r.delta_shift = (Real(2) * r.v0_bar / p.a_bar) / one_plus_g2;
    return r;
}

// Quadratic (Lorentzian) expansion of A^2 about the resonance energy:
//   A^2(E_n + delta_e) ~ D^2 (delta_e + delta)^2 + H^2.
template <class Real>
Real lorentzian_approx(const BasicResonanceParams<Real>& r, Real delta_e) {
    const Real u = delta_e + r.delta_shift;
    return r.d_sq * u * u + r.h_sq;
}

// |H/D| = (hbar^2 k_n / (mu a)) / (1 + g^2): the energy half-width of the
// resonance in this expansion, and the engine of the decay law.
template <class Real>
Real hd_ratio(const BasicResonanceParams<Real>& r) {
    using std::sqrt;
    return sqrt(r.h_sq / r.d_sq);
}

// alpha_n(t) = 2 |H/D| tau(t) / hbar, the exponent of the survival law. The
// hbar converts the energy width into a rate in the rescaled clock tau.
template <class Real>
Real decay_exponent(const BasicPhysicalParams<Real>& p, int n, Real t) {
    if (t < Real(0))
        throw ValidationError("decay_exponent needs t >= 0");
    const auto r = resonance_params(p, n);
    const ScalingFrame<Real> f{p.r0, p.v};
    return Real(2) * hd_ratio(r) * tau_of_t(f, t) / p.hbar;
}

namespace detail {
// Probabilities may overshoot [0,1] by a few ulp; anything worse is a bug.
template <class Real>
Real clamp_probability(Real x) {
    const Real slack = Real(1e-15);
    if (x > Real(1) && x <= Real(1) + slack)
        return Real(1);
    if (x < Real(0) && x >= -slack)
        return Real(0);
    if (x < Real(0) || x > Real(1))
        throw Error("probability left [0,1] beyond floating-point slack");
    return x;
}
} // namespace detail

template <class Real>
Real survival_probability(const BasicPhysicalParams<Real>& p, int n, Real t) {
    using std::exp;
    return detail::clamp_probability(exp(-decay_exponent(p, n, t)));
}

template <class Real>
Real nonadiabatic_probability(const BasicPhysicalParams<Real>& p, int n, Real t) {
    return detail::clamp_probability(Real(1) - survival_probability(p, n, t));
}

// Expanding-scale limit: tau -> 1/(r0 v) as t -> infinity for v > 0, so the
// transition probability saturates below 1. For v <= 0 tau is unbounded and
// the initial level is always emptied eventually.
template <class Real>
Real saturation_nonadiabatic(const BasicPhysicalParams<Real>& p, int n) {
    if (!(p.v > Real(0)))
        return Real(1);
    const auto r = resonance_params(p, n);
    using std::exp;
    const Real alpha_inf = Real(2) * hd_ratio(r) / (p.hbar * p.r0 * p.v);
    return detail::clamp_probability(Real(1) - exp(-alpha_inf));
}

} // namespace deltadrift
