#pragma once

#include "powertail/distribution.hpp"
#include "powertail/empirical.hpp"
#include "powertail/errors.hpp"
#include "powertail/fit.hpp"
#include "powertail/ingest.hpp"
#include "powertail/quadrature.hpp"
#include "powertail/sampler.hpp"
#include "powertail/simplex.hpp"
#include "powertail/specfun.hpp"
