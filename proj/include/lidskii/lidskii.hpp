#pragma once

// Umbrella header.

#include "lidskii/matrixcore.hpp"
#include "lidskii/opfunc.hpp"
#include "lidskii/jordan.hpp"
#include "lidskii/abel.hpp"
#include "lidskii/contour.hpp"
#include "lidskii/evolution.hpp"
#include "lidskii/spectralstats.hpp"
#include "lidskii/io.hpp"
#include "lidskii/scenario.hpp"
