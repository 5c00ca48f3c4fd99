#pragma once

// Umbrella header.

#include "bpxhd/assembly.hpp"
#include "bpxhd/bpx.hpp"
#include "bpxhd/budget.hpp"
#include "bpxhd/errors.hpp"
#include "bpxhd/interpolation.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/multilevel.hpp"
#include "bpxhd/quadrature.hpp"
#include "bpxhd/report.hpp"
#include "bpxhd/simplex.hpp"
#include "bpxhd/solvers.hpp"
#include "bpxhd/sparse.hpp"
#include "bpxhd/spectral.hpp"
#include "bpxhd/transfer.hpp"
#include "bpxhd/verification.hpp"
