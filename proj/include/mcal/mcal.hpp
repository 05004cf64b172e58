#pragma once

// Online l1-multicalibration via reduction to online linear-product
// optimization: grid forecasts, the halfspace oracle, the OGD+MWU composite
// learner, the oracle-efficient GFTPL learner, error evaluation, covers,
// adversary streams, and the sweep/rate-fit harness.

#include "mcal/bench.hpp"
#include "mcal/core.hpp"
#include "mcal/covers.hpp"
#include "mcal/gftpl.hpp"
#include "mcal/halfspace.hpp"
#include "mcal/mcerror.hpp"
#include "mcal/olpo.hpp"
#include "mcal/reduction.hpp"
#include "mcal/rng.hpp"
#include "mcal/specfile.hpp"
#include "mcal/streams.hpp"
