#pragma once

#include "normreg/core/dataset.hpp"
#include "normreg/core/parallel.hpp"
#include "normreg/core/random.hpp"
#include "normreg/core/special.hpp"
#include "normreg/error.hpp"
#include "normreg/evaluate.hpp"
#include "normreg/io.hpp"
#include "normreg/normalize.hpp"
#include "normreg/oracle.hpp"
#include "normreg/simulate.hpp"
#include "normreg/solver.hpp"
#include "normreg/version.hpp"
