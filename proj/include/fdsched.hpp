#pragma once

#include "fdsched/model.hpp"
#include "fdsched/rng.hpp"
#include "fdsched/trace.hpp"
#include "fdsched/sim.hpp"
#include "fdsched/single_user.hpp"
#include "fdsched/multi_user.hpp"
#include "fdsched/simplex.hpp"
#include "fdsched/mdp.hpp"
#include "fdsched/config.hpp"
#include "fdsched/experiment.hpp"
