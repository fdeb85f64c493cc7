#pragma once
// Umbrella header.

#include "swd/common.hpp"
#include "swd/geometry.hpp"
#include "swd/exact.hpp"
#include "swd/approx.hpp"
#include "swd/optimal.hpp"
#include "swd/cohort.hpp"
#include "swd/moments.hpp"
#include "swd/search.hpp"
#include "swd/config.hpp"
#include "swd/report.hpp"
