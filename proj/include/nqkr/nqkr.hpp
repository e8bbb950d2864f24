#pragma once

#include "nqkr/error.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/params.hpp"
#include "nqkr/propagator.hpp"
#include "nqkr/spectrum.hpp"
#include "nqkr/sweep.hpp"
#include "nqkr/wavefunction.hpp"
