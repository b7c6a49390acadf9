#pragma once

#include "normreg/simulate/generators.hpp"
#include "normreg/simulate/params.hpp"
#include "normreg/simulate/result.hpp"
#include "normreg/simulate/scenarios.hpp"
