#pragma once

// Umbrella header: chance-constrained message passing on Gaussian factor
// graphs, plus the closed-loop control benchmark built on top of it.

#include "ccmp/agent.hpp"
#include "ccmp/chance_constraint.hpp"
#include "ccmp/errors.hpp"
#include "ccmp/gaussian.hpp"
#include "ccmp/graph.hpp"
#include "ccmp/message.hpp"
#include "ccmp/rng.hpp"
#include "ccmp/rules.hpp"
#include "ccmp/simulator.hpp"
#include "ccmp/version.hpp"
