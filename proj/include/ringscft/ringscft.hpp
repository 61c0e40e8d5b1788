#pragma once

#include "ringscft/numeric.hpp"
#include "ringscft/harmonics.hpp"
#include "ringscft/basis.hpp"
#include "ringscft/angular.hpp"
#include "ringscft/tensors.hpp"
#include "ringscft/propagator.hpp"
#include "ringscft/scf.hpp"
#include "ringscft/grid.hpp"
#include "ringscft/observables.hpp"
#include "ringscft/reference.hpp"
#include "ringscft/config.hpp"
#include "ringscft/runner.hpp"
