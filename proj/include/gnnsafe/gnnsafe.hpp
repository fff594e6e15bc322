#pragma once

#include "gnnsafe/encoder.hpp"
#include "gnnsafe/energy.hpp"
#include "gnnsafe/errors.hpp"
#include "gnnsafe/evaluate.hpp"
#include "gnnsafe/generators.hpp"
#include "gnnsafe/gradcheck.hpp"
#include "gnnsafe/graph.hpp"
#include "gnnsafe/io.hpp"
#include "gnnsafe/matrix.hpp"
#include "gnnsafe/metrics.hpp"
#include "gnnsafe/rng.hpp"
#include "gnnsafe/training.hpp"
