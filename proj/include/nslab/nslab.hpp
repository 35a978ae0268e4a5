#pragma once

#include "nslab/config.hpp"
#include "nslab/convergence.hpp"
#include "nslab/dynamics.hpp"
#include "nslab/epochs.hpp"
#include "nslab/estimates.hpp"
#include "nslab/field.hpp"
#include "nslab/io.hpp"
#include "nslab/norms.hpp"
#include "nslab/operators.hpp"

namespace nslab {
inline constexpr const char* version = "0.1.0";
}
