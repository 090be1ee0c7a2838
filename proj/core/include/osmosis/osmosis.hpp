#pragma once

#include "osmosis/apps.hpp"
#include "osmosis/discretize.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/errors.hpp"
#include "osmosis/image.hpp"
#include "osmosis/io.hpp"
#include "osmosis/partition.hpp"
#include "osmosis/rect.hpp"
#include "osmosis/solver.hpp"
