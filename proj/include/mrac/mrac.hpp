// Copyright 2026 The mrac-scale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file mrac.hpp
/// Umbrella header for the simulation core (no file I/O dependencies).

#include "mrac/adaptive_laws.hpp"
#include "mrac/closed_loop_sim.hpp"
#include "mrac/error.hpp"
#include "mrac/governor.hpp"
#include "mrac/matrix_core.hpp"
#include "mrac/scalability.hpp"
#include "mrac/scenario.hpp"
#include "mrac/system_models.hpp"
