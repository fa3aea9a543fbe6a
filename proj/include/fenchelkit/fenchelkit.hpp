#pragma once

// Everything in one include.

#include "fenchelkit/error.hpp"
#include "fenchelkit/ext_real.hpp"
#include "fenchelkit/grid.hpp"
#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/legendre.hpp"
#include "fenchelkit/conjugate.hpp"
#include "fenchelkit/prox.hpp"
#include "fenchelkit/duality.hpp"
#include "fenchelkit/lp.hpp"
#include "fenchelkit/convex_program.hpp"
#include "fenchelkit/grid_domain.hpp"
#include "fenchelkit/geodesic.hpp"
#include "fenchelkit/transport.hpp"
#include "fenchelkit/beckmann.hpp"

namespace fenchelkit {
inline constexpr const char* kVersion = "0.1.0";
}
