#pragma once
/**
 * @file hdc.hpp
 * @brief Umbrella header for the hdc library.
 */

#include "hdc/ivp.hpp"
#include "hdc/steppers.hpp"
#include "hdc/stability.hpp"
#include "hdc/problems.hpp"
#include "hdc/oracle.hpp"
#include "hdc/pde.hpp"
#include "hdc/table.hpp"
#include "hdc/experiments.hpp"
