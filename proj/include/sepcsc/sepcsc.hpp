#pragma once

// Umbrella header: everything needed to build a problem, solve it and write results.

#include "sepcsc/version.hpp"
#include "sepcsc/core/dual.hpp"
#include "sepcsc/core/error.hpp"
#include "sepcsc/core/units.hpp"
#include "sepcsc/engine_models.hpp"
#include "sepcsc/power_model.hpp"
#include "sepcsc/mode_table.hpp"
#include "sepcsc/csc_control.hpp"
#include "sepcsc/dynamics/calendar.hpp"
#include "sepcsc/dynamics/ephemeris.hpp"
#include "sepcsc/dynamics/mee.hpp"
#include "sepcsc/adjoint.hpp"
#include "sepcsc/solver/problem.hpp"
#include "sepcsc/solver/propagate.hpp"
#include "sepcsc/solver/root.hpp"
#include "sepcsc/solver/shooting.hpp"
#include "sepcsc/solver/trajectory.hpp"
#include "sepcsc/io/report.hpp"
