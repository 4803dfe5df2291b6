// Copyright 2026 The CavLab Authors
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

// Truncated master-equation oracle: operators, steady states, Wigner grids,
// probe-cavity spectra and the fluctuating-Hamiltonian check.

#include "cavlab/liouville/operators.hpp"
#include "cavlab/liouville/probe.hpp"
#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/liouville/stochastic.hpp"
#include "cavlab/liouville/wigner.hpp"
