#pragma once

// Umbrella header for the fair spectral clustering toolkit.

#include "fsc/algorithms.hpp"
#include "fsc/cli.hpp"
#include "fsc/cluster.hpp"
#include "fsc/dense.hpp"
#include "fsc/dense_eigen.hpp"
#include "fsc/eigensolve.hpp"
#include "fsc/fairness.hpp"
#include "fsc/graph.hpp"
#include "fsc/io.hpp"
#include "fsc/operators.hpp"
#include "fsc/rng.hpp"
#include "fsc/sbm.hpp"
