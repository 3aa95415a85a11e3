#pragma once

#include "asap/accumulator.hpp"
#include "asap/erp.hpp"
#include "asap/error.hpp"
#include "asap/eval.hpp"
#include "asap/io.hpp"
#include "asap/model_io.hpp"
#include "asap/session.hpp"
#include "asap/signal.hpp"
#include "asap/sim.hpp"
#include "asap/spd.hpp"
