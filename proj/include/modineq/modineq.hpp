#pragma once

#include "modineq/core.hpp"
#include "modineq/tensor.hpp"
#include "modineq/spectral.hpp"
#include "modineq/gfunction.hpp"
#include "modineq/builders.hpp"
#include "modineq/random.hpp"
#include "modineq/equality.hpp"
#include "modineq/verification.hpp"
#include "modineq/report.hpp"
