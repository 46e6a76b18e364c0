#pragma once

#include "ofc/error.hpp"
#include "ofc/fsm_model.hpp"
#include "ofc/graph_index.hpp"
#include "ofc/subgraph_discovery.hpp"
#include "ofc/pattern_classifier.hpp"
#include "ofc/cost_model.hpp"
#include "ofc/sha256.hpp"
#include "ofc/hsm_transform.hpp"
#include "ofc/bridge_codegen.hpp"
#include "ofc/offchain_sim.hpp"
#include "ofc/session.hpp"
