#pragma once

#include "nlkg/errors.hpp"
#include "nlkg/fit.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/interaction_ode.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/solver.hpp"
#include "nlkg/spectrum.hpp"
#include "nlkg/tridiagonal.hpp"
#include "nlkg/experiments/analysis.hpp"
#include "nlkg/experiments/config.hpp"
#include "nlkg/experiments/record.hpp"
#include "nlkg/experiments/scenario.hpp"
#include "nlkg/experiments/shooting.hpp"
#include "nlkg/experiments/wmap.hpp"
