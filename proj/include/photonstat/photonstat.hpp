// photonstat.hpp - convenience umbrella for the whole library.

#pragma once

#include "photonstat/config.hpp"
#include "photonstat/correlate.hpp"
#include "photonstat/emitter.hpp"
#include "photonstat/estimators.hpp"
#include "photonstat/fit.hpp"
#include "photonstat/io.hpp"
#include "photonstat/linalg.hpp"
#include "photonstat/rng.hpp"
#include "photonstat/simulate.hpp"
#include "photonstat/spectrum.hpp"
#include "photonstat/timetags.hpp"
