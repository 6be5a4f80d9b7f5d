#ifndef RACO_RACO_HPP
#define RACO_RACO_HPP

#include "raco/barrier.hpp"
#include "raco/cccp.hpp"
#include "raco/channel.hpp"
#include "raco/config.hpp"
#include "raco/convex_fn.hpp"
#include "raco/csv.hpp"
#include "raco/errors.hpp"
#include "raco/harness.hpp"
#include "raco/ibcd.hpp"
#include "raco/model.hpp"
#include "raco/scalar_search.hpp"
#include "raco/solver_result.hpp"
#include "raco/special.hpp"
#include "raco/transform.hpp"

#endif // RACO_RACO_HPP
