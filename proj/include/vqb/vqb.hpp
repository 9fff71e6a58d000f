// Copyright 2026 The vqb Authors
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

/// @file vqb.hpp
/// Umbrella header for the library.

#include "vqb/linalg.hpp"
#include "vqb/random.hpp"
#include "vqb/channels.hpp"
#include "vqb/sdp.hpp"
#include "vqb/sdp_builder.hpp"
#include "vqb/diamond.hpp"
#include "vqb/broadcast.hpp"
#include "vqb/simulator.hpp"
#include "vqb/records.hpp"
#include "vqb/sweeps.hpp"
#include "vqb/verify.hpp"
