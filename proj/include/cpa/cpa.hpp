// Convenience umbrella for the whole library.
#pragma once

#include "cpa/corpus.hpp"
#include "cpa/error.hpp"
#include "cpa/eval.hpp"
#include "cpa/features.hpp"
#include "cpa/maxent.hpp"
#include "cpa/pipeline.hpp"
#include "cpa/resources.hpp"
#include "cpa/selection.hpp"
#include "cpa/trees.hpp"
