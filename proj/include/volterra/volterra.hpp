#pragma once

#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/forcing.hpp"
#include "volterra/grid.hpp"
#include "volterra/harness.hpp"
#include "volterra/measure.hpp"
#include "volterra/norms.hpp"
#include "volterra/oscillatory.hpp"
#include "volterra/quadrature.hpp"
#include "volterra/report.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/solver.hpp"
