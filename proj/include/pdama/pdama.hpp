#pragma once

#include "pdama/error.hpp"
#include "pdama/core_model.hpp"
#include "pdama/operators.hpp"
#include "pdama/solver.hpp"
#include "pdama/certificates.hpp"
#include "pdama/bench_oracle.hpp"
#include "pdama/io.hpp"
