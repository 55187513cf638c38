#pragma once

#include "fairsel/asymptotic.hpp"
#include "fairsel/dataset.hpp"
#include "fairsel/errors.hpp"
#include "fairsel/io.hpp"
#include "fairsel/model.hpp"
#include "fairsel/montecarlo.hpp"
#include "fairsel/numeric.hpp"
#include "fairsel/prior.hpp"
#include "fairsel/records.hpp"
#include "fairsel/rng.hpp"
#include "fairsel/stdnorm.hpp"

namespace fairsel {

inline constexpr const char* version = "0.1.0";

}  // namespace fairsel
