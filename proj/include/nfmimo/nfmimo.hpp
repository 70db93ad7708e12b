#pragma once

#include "nfmimo/analysis.hpp"
#include "nfmimo/config_io.hpp"
#include "nfmimo/error.hpp"
#include "nfmimo/forward_model.hpp"
#include "nfmimo/geometry.hpp"
#include "nfmimo/metrics.hpp"
#include "nfmimo/recon_direct.hpp"
#include "nfmimo/recon_tv.hpp"
#include "nfmimo/rng.hpp"
#include "nfmimo/synthesizer.hpp"
#include "nfmimo/tensorio.hpp"
#include "nfmimo/vector_ops.hpp"
