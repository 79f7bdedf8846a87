#pragma once

// Everything in one include.

#include "rcm/calculus.hpp"
#include "rcm/conductance.hpp"
#include "rcm/config.hpp"
#include "rcm/environment.hpp"
#include "rcm/error.hpp"
#include "rcm/experiments.hpp"
#include "rcm/exponents.hpp"
#include "rcm/inequalities.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"
#include "rcm/parallel.hpp"
#include "rcm/report.hpp"
#include "rcm/rng.hpp"
#include "rcm/solvers.hpp"
#include "rcm/walker.hpp"
