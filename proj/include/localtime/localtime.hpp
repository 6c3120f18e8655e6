#pragma once

#include "grid.hpp"
#include "path.hpp"
#include "quadrature.hpp"
#include "dc_function.hpp"
#include "follmer.hpp"
#include "level_crossing.hpp"
#include "skorokhod.hpp"
#include "lab.hpp"
