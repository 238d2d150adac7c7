#pragma once

#include "conekrf/errors.hpp"
#include "conekrf/scalar.hpp"
#include "conekrf/geometry.hpp"
#include "conekrf/mesh.hpp"
#include "conekrf/tridiagonal.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/initial_data.hpp"
#include "conekrf/estimates.hpp"
#include "conekrf/compare.hpp"
#include "conekrf/sweeps.hpp"
#include "conekrf/config.hpp"
#include "conekrf/io.hpp"
#include "conekrf/app.hpp"
