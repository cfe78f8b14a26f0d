#pragma once

// Aging uncoupled CTRW limits: analytic laws, samplers, fractional-calculus
// operators, the aged Fokker-Planck solver, and the statistical machinery
// that cross-validates them.

#include "actrwl/aging.hpp"
#include "actrwl/dist.hpp"
#include "actrwl/ffpe.hpp"
#include "actrwl/frac_calc.hpp"
#include "actrwl/hash.hpp"
#include "actrwl/io.hpp"
#include "actrwl/levy.hpp"
#include "actrwl/mc_stats.hpp"
#include "actrwl/parallel.hpp"
#include "actrwl/process.hpp"
#include "actrwl/quadrature.hpp"
#include "actrwl/rng.hpp"
#include "actrwl/scenario.hpp"
#include "actrwl/special.hpp"
