#pragma once

#include "pidram/address_map.hpp"
#include "pidram/bench.hpp"
#include "pidram/bias.hpp"
#include "pidram/characterize.hpp"
#include "pidram/command.hpp"
#include "pidram/config.hpp"
#include "pidram/controller.hpp"
#include "pidram/cost_model.hpp"
#include "pidram/device.hpp"
#include "pidram/errors.hpp"
#include "pidram/geometry.hpp"
#include "pidram/mmio.hpp"
#include "pidram/pimolib.hpp"
#include "pidram/poc.hpp"
#include "pidram/prf.hpp"
#include "pidram/stack.hpp"
#include "pidram/stats.hpp"
#include "pidram/supervisor.hpp"
#include "pidram/trace.hpp"
