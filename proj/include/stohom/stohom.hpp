#pragma once

/// Umbrella header: the full toolkit in one include.

#include "stohom/config.hpp"
#include "stohom/convergence.hpp"
#include "stohom/corrector.hpp"
#include "stohom/dirichlet.hpp"
#include "stohom/elliptic_map.hpp"
#include "stohom/fft.hpp"
#include "stohom/field.hpp"
#include "stohom/gaussian.hpp"
#include "stohom/grid.hpp"
#include "stohom/manifest.hpp"
#include "stohom/measure.hpp"
#include "stohom/rational.hpp"
#include "stohom/resonance.hpp"
#include "stohom/rng.hpp"
#include "stohom/runner.hpp"
#include "stohom/symmat.hpp"
#include "stohom/table.hpp"
#include "stohom/thread_pool.hpp"
#include "stohom/version.hpp"
