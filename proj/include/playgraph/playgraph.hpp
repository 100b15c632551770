/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header: the whole library except the CLI and HTTP layers, which
// pull in CLI11 and cpp-httplib.

#pragma once

#include "playgraph/checkpoint.hpp"
#include "playgraph/config.hpp"
#include "playgraph/dense.hpp"
#include "playgraph/error.hpp"
#include "playgraph/features.hpp"
#include "playgraph/game_state.hpp"
#include "playgraph/gradcheck.hpp"
#include "playgraph/graph_layers.hpp"
#include "playgraph/metrics.hpp"
#include "playgraph/model.hpp"
#include "playgraph/optim.hpp"
#include "playgraph/random.hpp"
#include "playgraph/state_io.hpp"
#include "playgraph/stats.hpp"
#include "playgraph/synthetic.hpp"
#include "playgraph/tensor.hpp"
#include "playgraph/training.hpp"
#include "playgraph/whatif.hpp"
