#pragma once

#include "wimp/agreement.hpp"
#include "wimp/asr_metrics.hpp"
#include "wimp/autodiff.hpp"
#include "wimp/checkpoint.hpp"
#include "wimp/corpus.hpp"
#include "wimp/encoder.hpp"
#include "wimp/error.hpp"
#include "wimp/evaluation.hpp"
#include "wimp/heads.hpp"
#include "wimp/model.hpp"
#include "wimp/render.hpp"
#include "wimp/rng.hpp"
#include "wimp/training.hpp"
