// Everything: grid, energies, gradient, BFGS, obstacles, experiments.
#pragma once

#include "elastica/energy.hpp"
#include "elastica/experiments.hpp"
#include "elastica/gradient.hpp"
#include "elastica/io.hpp"
#include "elastica/obstacles.hpp"
#include "elastica/optimizer.hpp"
#include "elastica/params.hpp"
#include "elastica/periodic_grid.hpp"
#include "elastica/quadrature.hpp"
