#pragma once

// Umbrella header: the full modulo-imaging HDR toolkit.

#include "modhdr/bench.hpp"
#include "modhdr/dataset.hpp"
#include "modhdr/dct.hpp"
#include "modhdr/error.hpp"
#include "modhdr/features.hpp"
#include "modhdr/image.hpp"
#include "modhdr/loss.hpp"
#include "modhdr/metrics.hpp"
#include "modhdr/npy.hpp"
#include "modhdr/pfm.hpp"
#include "modhdr/png_io.hpp"
#include "modhdr/restorer.hpp"
#include "modhdr/rng.hpp"
#include "modhdr/scenes.hpp"
#include "modhdr/sensor.hpp"
#include "modhdr/train.hpp"
#include "modhdr/unwrap.hpp"
#include "modhdr/unwrap_oracle.hpp"
