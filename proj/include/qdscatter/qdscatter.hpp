#pragma once

#include "qdscatter/channels.hpp"
#include "qdscatter/config.hpp"
#include "qdscatter/coulomb.hpp"
#include "qdscatter/eigensolve.hpp"
#include "qdscatter/entanglement.hpp"
#include "qdscatter/error.hpp"
#include "qdscatter/grid.hpp"
#include "qdscatter/hamiltonian.hpp"
#include "qdscatter/io.hpp"
#include "qdscatter/lattice.hpp"
#include "qdscatter/leads.hpp"
#include "qdscatter/linear_solver.hpp"
#include "qdscatter/material.hpp"
#include "qdscatter/model.hpp"
#include "qdscatter/oracle.hpp"
#include "qdscatter/potential.hpp"
#include "qdscatter/qtbm.hpp"
#include "qdscatter/spectrum.hpp"
#include "qdscatter/sweep.hpp"
#include "qdscatter/version.hpp"
