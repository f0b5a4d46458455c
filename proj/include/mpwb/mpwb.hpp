#pragma once

// Umbrella header: the whole library.

#include "mpwb/bargmann.hpp"
#include "mpwb/core.hpp"
#include "mpwb/gaussian.hpp"
#include "mpwb/halfform.hpp"
#include "mpwb/json_io.hpp"
#include "mpwb/metaplectic.hpp"
#include "mpwb/sampling.hpp"
#include "mpwb/selftest.hpp"
#include "mpwb/symplectic.hpp"
#include "mpwb/trace_formulas.hpp"
