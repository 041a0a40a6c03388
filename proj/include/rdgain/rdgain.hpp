#pragma once

#include "rdgain/analysis.hpp"
#include "rdgain/backstepping.hpp"
#include "rdgain/closedloop.hpp"
#include "rdgain/coefficients.hpp"
#include "rdgain/config.hpp"
#include "rdgain/csv.hpp"
#include "rdgain/errors.hpp"
#include "rdgain/numerics.hpp"
#include "rdgain/plant.hpp"
#include "rdgain/stats.hpp"
#include "rdgain/trigger.hpp"
