#pragma once

#include "capture_io.hpp"
#include "clock_config.hpp"
#include "duration.hpp"
#include "ensm_model.hpp"
#include "errors.hpp"
#include "event_sim.hpp"
#include "mac_compliance.hpp"
#include "rf_model.hpp"
#include "run_config.hpp"
#include "spi_codec.hpp"
