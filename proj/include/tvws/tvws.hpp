#pragma once

#include "tvws/core/error.hpp"
#include "tvws/core/fft.hpp"
#include "tvws/core/metrics.hpp"
#include "tvws/core/noise.hpp"
#include "tvws/core/signal.hpp"
#include "tvws/core/synthetic.hpp"
#include "tvws/extend/extend.hpp"
#include "tvws/io/csv.hpp"
#include "tvws/pipeline/bench.hpp"
#include "tvws/pipeline/config.hpp"
#include "tvws/pipeline/decompose.hpp"
#include "tvws/pipeline/denoise.hpp"
#include "tvws/pipeline/report.hpp"
#include "tvws/pipeline/segment.hpp"
#include "tvws/shape/demod.hpp"
#include "tvws/shape/lr.hpp"
#include "tvws/shape/model.hpp"
#include "tvws/shape/nodes.hpp"
#include "tvws/shape/order.hpp"
#include "tvws/shape/pchip.hpp"
#include "tvws/shape/warm_start.hpp"
#include "tvws/solver/lm.hpp"
#include "tvws/tf/reconstruct.hpp"
#include "tvws/tf/ridge.hpp"
#include "tvws/tf/stft.hpp"
#include "tvws/tf/threshold.hpp"
