#pragma once

#include "copar/coefficients.hpp"
#include "copar/core.hpp"
#include "copar/field.hpp"
#include "copar/integrals.hpp"
#include "copar/mesh.hpp"
#include "copar/slices.hpp"
#include "copar/spatial.hpp"
#include "copar/stepper.hpp"
#include "copar/analysis.hpp"
#include "copar/kwc.hpp"
