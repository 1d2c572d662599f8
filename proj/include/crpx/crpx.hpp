#pragma once

#include "crpx/atom.hpp"
#include "crpx/cone.hpp"
#include "crpx/crp_engine.hpp"
#include "crpx/exact_oracle.hpp"
#include "crpx/intensity.hpp"
#include "crpx/io.hpp"
#include "crpx/limit_sampler.hpp"
#include "crpx/parallel.hpp"
#include "crpx/rng.hpp"
#include "crpx/special.hpp"
#include "crpx/stats.hpp"
#include "crpx/verify.hpp"

namespace crpx {

#ifdef CRPX_VERSION_STRING
inline constexpr const char* kVersion = CRPX_VERSION_STRING;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

}  // namespace crpx
