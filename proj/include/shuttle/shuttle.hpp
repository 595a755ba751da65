#pragma once

#include "shuttle/analysis.hpp"
#include "shuttle/energy.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/parallel.hpp"
#include "shuttle/quadrature.hpp"
#include "shuttle/sensitivity.hpp"
#include "shuttle/stochastic.hpp"
#include "shuttle/trajectory.hpp"
#include "shuttle/units.hpp"
