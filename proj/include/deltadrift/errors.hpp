#pragma once

#include <stdexcept>
#include <string>

namespace deltadrift {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// R(t) = R0 + v t dropped to zero or below somewhere we need it positive.
struct NonPositiveScale : Error {
    using Error::Error;
};

// A structurally positive quantity (mu, hbar, a_bar, r0, ...) is not.
struct NonPositiveParameter : Error {
    using Error::Error;
};

// Second surface classically open at the coupling point: E >= V2 makes the
// diagonal Green's function complex. Use v0_override to supply a real strength.
struct OpenChannel : Error {
    using Error::Error;
};

// Grid too coarse for the requested resonance wavelength.
struct UnderResolved : Error {
    using Error::Error;
};

// Propagator lost unitarity (or a related in-run integrity bound).
struct SolverDiverged : Error {
    using Error::Error;
};

// Probability reached a region of the box we do not trust (moving delta or
// leaked norm beyond the padding margin).
struct DomainExceeded : Error {
    using Error::Error;
};

// Fit window holds fewer samples than a least-squares slope needs.
struct InsufficientSamples : Error {
    using Error::Error;
};

// Configuration document is not well formed (syntax, unknown key, bad type).
struct ParseError : Error {
    using Error::Error;
};

// Configuration parsed but violates an invariant (bad mode, missing axis, ...).
struct ValidationError : Error {
    using Error::Error;
};

} // namespace deltadrift
