#pragma once

#include "multitone/bin_detect.hpp"
#include "multitone/bin_refine.hpp"
#include "multitone/cli.hpp"
#include "multitone/common.hpp"
#include "multitone/decompose.hpp"
#include "multitone/oracle_bench.hpp"
#include "multitone/signal.hpp"
#include "multitone/spectrum.hpp"
#include "multitone/tone_fit.hpp"
