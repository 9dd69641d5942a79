#pragma once

// Geographically weighted modelling toolkit: kernels and distance metrics,
// local summary statistics, PCA, regression (basic/mixed/heteroskedastic),
// discriminant analysis, permutation tests, and bandwidth selection.

#include "gwkit/bandwidth.hpp"
#include "gwkit/dataset.hpp"
#include "gwkit/discriminant.hpp"
#include "gwkit/errors.hpp"
#include "gwkit/geometry.hpp"
#include "gwkit/inference.hpp"
#include "gwkit/io.hpp"
#include "gwkit/kernel.hpp"
#include "gwkit/mixed.hpp"
#include "gwkit/montecarlo.hpp"
#include "gwkit/pca.hpp"
#include "gwkit/regression.hpp"
#include "gwkit/summary.hpp"
