#pragma once

#include "gfmmd/bench.hpp"
#include "gfmmd/graph.hpp"
#include "gfmmd/io.hpp"
#include "gfmmd/metric.hpp"
#include "gfmmd/parallel.hpp"
#include "gfmmd/spectral.hpp"
