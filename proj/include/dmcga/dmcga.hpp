#pragma once

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"
#include "dmcga/feature_space.hpp"
#include "dmcga/gawar.hpp"
#include "dmcga/metrics.hpp"
#include "dmcga/pipeline.hpp"
#include "dmcga/random.hpp"
#include "dmcga/rankers.hpp"
#include "dmcga/tree.hpp"
