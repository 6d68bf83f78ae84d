#pragma once

#include "copar/convergence.hpp"
#include "copar/estimates.hpp"
#include "copar/mms.hpp"
#include "copar/oracles.hpp"
#include "copar/residual.hpp"
