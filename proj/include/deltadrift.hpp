#pragma once

// deltadrift: decay of a particle confined by a moving delta-potential
// coupling, reduced to a single open channel.  Header-only.

#include "deltadrift/errors.hpp"
#include "deltadrift/params.hpp"
#include "deltadrift/scaling.hpp"
#include "deltadrift/resonance.hpp"
#include "deltadrift/tdse.hpp"
#include "deltadrift/config.hpp"
#include "deltadrift/report.hpp"
#include "deltadrift/runner.hpp"
