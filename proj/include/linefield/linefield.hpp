#pragma once

// Umbrella header.

#include "analysis.hpp"
#include "core.hpp"
#include "curve.hpp"
#include "domain.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "patterns.hpp"
