#pragma once

// Core model: device, disturbance, mitigation, maintenance, PUD and PNM.
#include "memcentric/common/bit_row.hpp"
#include "memcentric/common/error.hpp"
#include "memcentric/common/random.hpp"
#include "memcentric/disturbance/measure.hpp"
#include "memcentric/dram/device.hpp"
#include "memcentric/mitigation/refresh.hpp"
#include "memcentric/pnm/model.hpp"
#include "memcentric/pud/circuit.hpp"
#include "memcentric/pud/compiler.hpp"
#include "memcentric/pud/exec.hpp"
#include "memcentric/pud/layout.hpp"
#include "memcentric/pud/trng.hpp"
#include "memcentric/smd/controller.hpp"
