#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>

#include "errors.hpp"

namespace deltadrift {

// Time-dependent scaling (Berry-Klein) frame: R(t) = r0 + v t maps the
// moving-potential problem onto a stationary one in x_bar = x / R(t) and
// the rescaled time tau = integral_0^t ds / R^2(s).
template <class Real = double>
struct ScalingFrame {
    Real r0{1};
    Real v{0};
};

template <class Real>
Real scale_factor(const ScalingFrame<Real>& f, Real t) {
    const Real r = f.r0 + f.v * t;
    if (!(r > Real(0))) {
        std::ostringstream os;
        os << "scale factor R(" << t << ") = " << r << " is not positive";
        throw NonPositiveScale(os.str());
    }
    return r;
}

// Closed form of the rescaled time for linear R:
//   tau(t) = integral_0^t ds / R^2(s) = t / (r0 * R(t)).
template <class Real>
Real tau_of_t(const ScalingFrame<Real>& f, Real t) {
    // Linearity: positivity at both endpoints covers [0, t].
    (void)scale_factor(f, Real(0));
    const Real rt = scale_factor(f, t);
    return t / (f.r0 * rt);
}

// Lab -> rescaled coordinate. The inverse is x = x_bar * R(t).
template <class Real>
Real frame_map(const ScalingFrame<Real>& f, Real x, Real t) {
    return x / scale_factor(f, t);
}

// An eigenstate of the stationary rescaled problem: amplitude psi(x_bar)
// with wavenumber k_bar and energy E_bar = hbar^2 k_bar^2 / (2 mu). The
// amplitude is a callable so any model (box, scattering, ...) plugs in.
template <class Real = double>
struct RescaledEigenstate {
    Real k_bar{};
    Real energy_bar{};
    std::function<std::complex<Real>(Real)> amplitude;
};

template <class Real>
RescaledEigenstate<Real> make_eigenstate(Real k_bar,
                                         std::function<std::complex<Real>(Real)> amplitude,
                                         Real mu = Real(1), Real hbar = Real(1)) {
    RescaledEigenstate<Real> s;
    s.k_bar = k_bar;
    s.energy_bar = hbar * hbar * k_bar * k_bar / (Real(2) * mu);
    s.amplitude = std::move(amplitude);
    return s;
}

// Box eigenstate sqrt(2/a) sin(n pi x_bar / a) on [0, a], zero outside.
template <class Real>
RescaledEigenstate<Real> box_eigenstate(int n, Real a_bar,
                                        Real mu = Real(1), Real hbar = Real(1)) {
    const Real k = Real(n) * std::numbers::pi_v<Real> / a_bar;
    auto amp = [n, a_bar](Real xb) -> std::complex<Real> {
        if (xb < Real(0) || xb > a_bar)
            return {Real(0), Real(0)};
        using std::sin;
        using std::sqrt;
        return {sqrt(Real(2) / a_bar) *
                    sin(Real(n) * std::numbers::pi_v<Real> * xb / a_bar),
                Real(0)};
    };
    return make_eigenstate<Real>(k, amp, mu, hbar);
}

// Lab-frame wavefunction reconstructed from a rescaled eigenstate:
//   phi(x, t) = R^{-1/2} exp(i mu v x^2 / (2 hbar R))
//               exp(-i E_bar tau / hbar) psi(x / R).
// The 1/sqrt(R) keeps the lab norm equal to the rescaled norm, the first
// phase is the velocity-field gauge, the second is the stationary clock in tau.
template <class Real>
std::complex<Real> lab_wavefunction(const ScalingFrame<Real>& f,
                                    const RescaledEigenstate<Real>& state,
                                    Real x, Real t,
                                    Real mu = Real(1), Real hbar = Real(1)) {
    const Real r = scale_factor(f, t);
    const Real tau = tau_of_t(f, t);
    const std::complex<Real> i{Real(0), Real(1)};
    const std::complex<Real> gauge =
        std::exp(i * (mu * f.v * x * x / (Real(2) * hbar * r)));
    const std::complex<Real> clock =
        std::exp(-i * (state.energy_bar * tau / hbar));
    using std::sqrt;
    return gauge * clock * state.amplitude(x / r) / sqrt(r);
}

} // namespace deltadrift
