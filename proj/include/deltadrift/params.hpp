#pragma once

#include <optional>
#include <sstream>

#include "errors.hpp"

namespace deltadrift {

// Single source of truth for every formula downstream. Natural units
// (hbar = mu = 1) are the default; nothing assumes them.
template <class Real = double>
struct BasicPhysicalParams {
    Real mu = Real(1);        // mass
    Real hbar = Real(1);      // reduced Planck constant
    Real u0_bar = Real(0);    // bare coupling strength of the delta (energy * length)
    Real v2_offset = Real(0); // constant offset of the second diabatic surface
    Real a_bar = Real(1);     // rescaled delta position (> 0)
    Real r0 = Real(1);        // scale factor at t = 0 (> 0)
    Real v = Real(0);         // scale velocity, R(t) = r0 + v t (may be <= 0)
    // Optional real effective strength; when set it bypasses the
    // Green's-function elimination of channel 2 entirely.
    std::optional<Real> v0_override{};
};

using PhysicalParams = BasicPhysicalParams<double>;

// Check structural invariants and that R(t) stays positive over [0, horizon].
// Idempotent: a params value that passed once passes again unchanged.
template <class Real>
BasicPhysicalParams<Real> validate(const BasicPhysicalParams<Real>& p, Real horizon) {
    auto positive = [](Real x, const char* name) {
        if (!(x > Real(0))) {
            std::ostringstream os;
            os << name << " must be > 0, got " << x;
            throw NonPositiveParameter(os.str());
        }
    };
    positive(p.mu, "mu");
    positive(p.hbar, "hbar");
    positive(p.a_bar, "a_bar");
    positive(p.r0, "r0");
    if (horizon < Real(0))
        throw ValidationError("validation horizon must be >= 0");
    // R is linear, so positivity at both ends covers the whole interval.
    if (p.v < Real(0) && p.r0 + p.v * horizon <= Real(0)) {
        std::ostringstream os;
        os << "R(t) = " << p.r0 << " + " << p.v
           << "*t reaches zero at t = " << -p.r0 / p.v
           << " inside horizon " << horizon;
        throw NonPositiveScale(os.str());
    }
    return p;
}

} // namespace deltadrift
