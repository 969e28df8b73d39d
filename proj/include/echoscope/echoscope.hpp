// Copyright 2026 The Echoscope Authors.
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

#include "echoscope/covariates.hpp"
#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"
#include "echoscope/ingest.hpp"
#include "echoscope/metrics.hpp"
#include "echoscope/models.hpp"
#include "echoscope/partition.hpp"
#include "echoscope/pipeline.hpp"
#include "echoscope/random.hpp"
#include "echoscope/stats.hpp"
#include "echoscope/synth.hpp"
#include "echoscope/time.hpp"
#include "echoscope/viz.hpp"
