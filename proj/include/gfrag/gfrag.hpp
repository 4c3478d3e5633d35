#pragma once

#include "gfrag/errors.hpp"
#include "gfrag/quadrature.hpp"
#include "gfrag/grid.hpp"
#include "gfrag/support.hpp"
#include "gfrag/model.hpp"
#include "gfrag/resolvent.hpp"
#include "gfrag/closed_form.hpp"
#include "gfrag/pde_solver.hpp"
#include "gfrag/spectral.hpp"
#include "gfrag/irreducibility.hpp"
#include "gfrag/csv.hpp"
#include "gfrag/config.hpp"
