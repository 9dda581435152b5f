#pragma once

#include "ccim/energy.hpp"
#include "ccim/imaging.hpp"
#include "ccim/instance.hpp"
#include "ccim/io.hpp"
#include "ccim/kernel.hpp"
#include "ccim/noise.hpp"
#include "ccim/packed_symmetric.hpp"
#include "ccim/problems.hpp"
#include "ccim/schedules.hpp"
#include "ccim/solvers.hpp"
#include "ccim/types.hpp"
