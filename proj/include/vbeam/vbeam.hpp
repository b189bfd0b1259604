#pragma once

// Umbrella header: the whole library.

#include "vbeam/acquisition.hpp"
#include "vbeam/common.hpp"
#include "vbeam/config.hpp"
#include "vbeam/fdbf.hpp"
#include "vbeam/fft.hpp"
#include "vbeam/frames.hpp"
#include "vbeam/geometry.hpp"
#include "vbeam/lut.hpp"
#include "vbeam/metrics.hpp"
#include "vbeam/phantom.hpp"
#include "vbeam/pipeline.hpp"
#include "vbeam/pulse.hpp"
#include "vbeam/recovery.hpp"
#include "vbeam/report.hpp"
#include "vbeam/time_beamformer.hpp"
#include "vbeam/volume.hpp"
