#pragma once

// Umbrella header: streaming plateau detection, learning-rate policies,
// the synthetic loss process and the trace/config/report plumbing.

#include "fastface/config.hpp"
#include "fastface/detector.hpp"
#include "fastface/ema.hpp"
#include "fastface/errors.hpp"
#include "fastface/haar.hpp"
#include "fastface/harness.hpp"
#include "fastface/rng.hpp"
#include "fastface/scheduler.hpp"
#include "fastface/sim.hpp"
#include "fastface/trace.hpp"
