#pragma once

#include "tailbound/bounds.hpp"
#include "tailbound/csv.hpp"
#include "tailbound/errors.hpp"
#include "tailbound/mc.hpp"
#include "tailbound/partition.hpp"
#include "tailbound/rng.hpp"
#include "tailbound/scenarios.hpp"
#include "tailbound/types.hpp"
