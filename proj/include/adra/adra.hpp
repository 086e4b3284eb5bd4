#pragma once

#include "adra/analytic.hpp"
#include "adra/bisection.hpp"
#include "adra/error.hpp"
#include "adra/exact_chain.hpp"
#include "adra/io.hpp"
#include "adra/opt.hpp"
#include "adra/rng.hpp"
#include "adra/sim.hpp"
#include "adra/version.hpp"
