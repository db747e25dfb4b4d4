#pragma once

#include "hvac/error.hpp"
#include "hvac/network.hpp"
#include "hvac/disturbance.hpp"
#include "hvac/thermal.hpp"
#include "hvac/problems.hpp"
#include "hvac/oracle.hpp"
#include "hvac/ctrl_m1.hpp"
#include "hvac/ctrl_m2.hpp"
#include "hvac/scenario.hpp"
#include "hvac/simulation.hpp"
