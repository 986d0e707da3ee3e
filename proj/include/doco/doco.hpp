#pragma once

#include "doco/algorithms.hpp"
#include "doco/config.hpp"
#include "doco/delay.hpp"
#include "doco/errors.hpp"
#include "doco/gossip.hpp"
#include "doco/instances.hpp"
#include "doco/linalg.hpp"
#include "doco/losses.hpp"
#include "doco/plot.hpp"
#include "doco/report.hpp"
#include "doco/rng.hpp"
#include "doco/simulator.hpp"
#include "doco/topology.hpp"
