#pragma once
// Everything: model, solvers, planner, simulator and the oracle checks.

#include "tompc/admm_planner.hpp"
#include "tompc/collision.hpp"
#include "tompc/ddp.hpp"
#include "tompc/dynamics.hpp"
#include "tompc/interaction.hpp"
#include "tompc/lie.hpp"
#include "tompc/objective.hpp"
#include "tompc/qp.hpp"
#include "tompc/robot_io.hpp"
#include "tompc/robot_model.hpp"
#include "tompc/scenario.hpp"
#include "tompc/self_check.hpp"
#include "tompc/simulator.hpp"
#include "tompc/worker_pool.hpp"
