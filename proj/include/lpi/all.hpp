#pragma once

// Core headers in one include. The JSON-dependent pieces (mdp_io.hpp,
// experiment.hpp) are deliberately left out; include them where needed.

#include "lpi/codec.hpp"
#include "lpi/decay.hpp"
#include "lpi/envs.hpp"
#include "lpi/exact.hpp"
#include "lpi/graph.hpp"
#include "lpi/lpi.hpp"
#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"
#include "lpi/qtable.hpp"
#include "lpi/rng.hpp"
#include "lpi/svg.hpp"
#include "lpi/td.hpp"
#include "lpi/trajectory.hpp"
