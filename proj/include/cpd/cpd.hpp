#pragma once

// Umbrella header for the changepoint detection library.

#include "cpd/amoc.hpp"
#include "cpd/ar_model.hpp"
#include "cpd/distance.hpp"
#include "cpd/estimate.hpp"
#include "cpd/harness.hpp"
#include "cpd/io.hpp"
#include "cpd/likelihood.hpp"
#include "cpd/limit_laws.hpp"
#include "cpd/penalized.hpp"
#include "cpd/segmentation.hpp"
#include "cpd/simulate.hpp"
#include "cpd/types.hpp"
