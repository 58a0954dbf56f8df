#pragma once

#include "nanoblock/error.hpp"
#include "nanoblock/fock.hpp"
#include "nanoblock/cnt.hpp"
#include "nanoblock/model.hpp"
#include "nanoblock/steady_state.hpp"
#include "nanoblock/observables.hpp"
#include "nanoblock/convergence.hpp"
#include "nanoblock/sweep.hpp"
#include "nanoblock/config.hpp"
