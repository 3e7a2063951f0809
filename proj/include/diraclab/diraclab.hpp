#pragma once

#include "diraclab/error.hpp"
#include "diraclab/clifford.hpp"
#include "diraclab/liealg.hpp"
#include "diraclab/specfun.hpp"
#include "diraclab/manifold.hpp"
#include "diraclab/graphdirac.hpp"
#include "diraclab/estimators.hpp"
#include "diraclab/config.hpp"
#include "diraclab/cli.hpp"
