#pragma once

// Convenience include for the whole library.

#include "oplt/classifier.hpp"
#include "oplt/io.hpp"
#include "oplt/iplt.hpp"
#include "oplt/metrics.hpp"
#include "oplt/model_io.hpp"
#include "oplt/oplt.hpp"
#include "oplt/predict.hpp"
#include "oplt/properness.hpp"
#include "oplt/sparse.hpp"
#include "oplt/synth.hpp"
#include "oplt/tree.hpp"
#include "oplt/tree_build.hpp"
#include "oplt/weight_store.hpp"
