#pragma once

#include "accel/clf.hpp"
#include "accel/control.hpp"
#include "accel/discrete.hpp"
#include "accel/flow.hpp"
#include "accel/metric.hpp"
#include "accel/objective.hpp"
#include "accel/types.hpp"
#include "accel/verify.hpp"
