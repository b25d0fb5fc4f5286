#pragma once

#include "fastslow/characteristic.hpp"
#include "fastslow/commands.hpp"
#include "fastslow/csv.hpp"
#include "fastslow/error.hpp"
#include "fastslow/exp_polynomial.hpp"
#include "fastslow/expression.hpp"
#include "fastslow/numeric.hpp"
#include "fastslow/parallel.hpp"
#include "fastslow/report.hpp"
#include "fastslow/rho2.hpp"
#include "fastslow/roots.hpp"
#include "fastslow/scenario.hpp"
#include "fastslow/simulate.hpp"
#include "fastslow/stability.hpp"
#include "fastslow/system.hpp"
