#pragma once

#include "devrec/ensemble.hpp"
#include "devrec/error.hpp"
#include "devrec/features.hpp"
#include "devrec/mlp.hpp"
#include "devrec/pgm.hpp"
#include "devrec/pipeline.hpp"
#include "devrec/raster.hpp"
#include "devrec/skeleton.hpp"
#include "devrec/synthetic.hpp"
