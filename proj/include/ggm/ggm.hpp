#pragma once

#include "ggm/covariance.hpp"
#include "ggm/graph.hpp"
#include "ggm/io.hpp"
#include "ggm/linalg.hpp"
#include "ggm/model_selection.hpp"
#include "ggm/rng.hpp"
#include "ggm/solvers.hpp"
#include "ggm/synthetic.hpp"

namespace ggm {
inline constexpr const char* kVersion = "0.1.0";
}
