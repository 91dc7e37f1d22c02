#pragma once

#include "saccadet/adapters.hpp"
#include "saccadet/config.hpp"
#include "saccadet/core.hpp"
#include "saccadet/density.hpp"
#include "saccadet/dmap.hpp"
#include "saccadet/error.hpp"
#include "saccadet/eval.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/io.hpp"
#include "saccadet/merge.hpp"
#include "saccadet/pipeline.hpp"
#include "saccadet/random.hpp"
#include "saccadet/report.hpp"
#include "saccadet/saccade.hpp"
#include "saccadet/synth.hpp"
