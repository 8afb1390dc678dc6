#ifndef QKELLY_QKELLY_HPP
#define QKELLY_QKELLY_HPP

#include "arrangement.hpp"
#include "exact_lp.hpp"
#include "integer_linalg.hpp"
#include "parallel.hpp"
#include "problem_model.hpp"
#include "quantile_eval.hpp"
#include "rational.hpp"
#include "recursive_solver.hpp"
#include "shadow_kelly.hpp"
#include "stratum_solver.hpp"
#include "support_set.hpp"
#include "verification.hpp"
#include "wealth_geometry.hpp"

#endif // QKELLY_QKELLY_HPP
