#pragma once

#include "manikde/analysis.hpp"
#include "manikde/common.hpp"
#include "manikde/covering.hpp"
#include "manikde/csv.hpp"
#include "manikde/density.hpp"
#include "manikde/descriptors.hpp"
#include "manikde/estimators.hpp"
#include "manikde/fat_cantor.hpp"
#include "manikde/geometry.hpp"
#include "manikde/integrability.hpp"
#include "manikde/kernels.hpp"
#include "manikde/parallel.hpp"
#include "manikde/partition.hpp"
#include "manikde/rng.hpp"
#include "manikde/sampling.hpp"
