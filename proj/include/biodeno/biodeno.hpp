#pragma once

#include "biodeno/audio_clip.hpp"
#include "biodeno/backend.hpp"
#include "biodeno/config.hpp"
#include "biodeno/error.hpp"
#include "biodeno/evaluation.hpp"
#include "biodeno/manifest.hpp"
#include "biodeno/metrics.hpp"
#include "biodeno/mixing.hpp"
#include "biodeno/pseudo_target.hpp"
#include "biodeno/random.hpp"
#include "biodeno/resample.hpp"
#include "biodeno/segmentation.hpp"
#include "biodeno/signal_ops.hpp"
#include "biodeno/spectral_gate.hpp"
#include "biodeno/version.hpp"
#include "biodeno/wav_io.hpp"
