#pragma once

#include "cantor/arith.hpp"
#include "cantor/convolution.hpp"
#include "cantor/dimension.hpp"
#include "cantor/errors.hpp"
#include "cantor/experiment.hpp"
#include "cantor/generators.hpp"
#include "cantor/madic.hpp"
#include "cantor/parallel.hpp"
#include "cantor/patterns.hpp"
#include "cantor/rng.hpp"
#include "cantor/serialize.hpp"
#include "cantor/special.hpp"
#include "cantor/spectral.hpp"
#include "cantor/stats.hpp"
