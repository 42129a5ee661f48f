#ifndef TRUNCSA_TRUNCSA_HPP
#define TRUNCSA_TRUNCSA_HPP

// Truncated stochastic approximation with moving truncation regions:
// projection primitives, random drive fields, the core recursion, the three
// built-in estimation examples, convergence-condition monitors, and the
// replication harness.

#include "truncsa/common.hpp"
#include "truncsa/config.hpp"
#include "truncsa/convex.hpp"
#include "truncsa/diagnostics.hpp"
#include "truncsa/engine.hpp"
#include "truncsa/fields.hpp"
#include "truncsa/harness.hpp"
#include "truncsa/history.hpp"
#include "truncsa/models.hpp"
#include "truncsa/rng.hpp"
#include "truncsa/specfun.hpp"

#endif  // TRUNCSA_TRUNCSA_HPP
