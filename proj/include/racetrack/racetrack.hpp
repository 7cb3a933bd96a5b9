#pragma once

#include "racetrack/analytics.hpp"
#include "racetrack/config.hpp"
#include "racetrack/config_io.hpp"
#include "racetrack/errors.hpp"
#include "racetrack/event_log.hpp"
#include "racetrack/loss_timing.hpp"
#include "racetrack/optics.hpp"
#include "racetrack/simulator.hpp"
#include "racetrack/sweep.hpp"
