#pragma once

#include "ipmsrl/agents.hpp"
#include "ipmsrl/alerting.hpp"
#include "ipmsrl/attacker.hpp"
#include "ipmsrl/config.hpp"
#include "ipmsrl/defense.hpp"
#include "ipmsrl/engine.hpp"
#include "ipmsrl/harness.hpp"
#include "ipmsrl/kill_chain.hpp"
#include "ipmsrl/observation.hpp"
#include "ipmsrl/protocol.hpp"
#include "ipmsrl/reward.hpp"
#include "ipmsrl/rng.hpp"
#include "ipmsrl/scenario.hpp"
#include "ipmsrl/trace.hpp"
#include "ipmsrl/transport.hpp"
#include "ipmsrl/world.hpp"
