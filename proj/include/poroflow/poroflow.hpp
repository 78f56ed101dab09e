#pragma once

// Library umbrella header. The command-line layer lives in cli.hpp.

#include "adaptive.hpp"
#include "assembly.hpp"
#include "cases.hpp"
#include "estimator.hpp"
#include "fields.hpp"
#include "linear_solver.hpp"
#include "mesh.hpp"
#include "mesh_io.hpp"
#include "physics.hpp"
#include "postproc.hpp"
#include "quadrature.hpp"
#include "report_io.hpp"
#include "solver.hpp"
#include "spaces.hpp"
