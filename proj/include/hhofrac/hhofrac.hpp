#pragma once

#include "basis.hpp"
#include "benchmark.hpp"
#include "common.hpp"
#include "config.hpp"
#include "elasticity.hpp"
#include "energy.hpp"
#include "history.hpp"
#include "linear_solver.hpp"
#include "mesh.hpp"
#include "meshgen.hpp"
#include "output.hpp"
#include "phasefield.hpp"
#include "postprocess.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
