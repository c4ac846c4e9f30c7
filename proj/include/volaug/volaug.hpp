// Copyright 2026 The volaug Authors
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

#ifndef VOLAUG_VOLAUG_HPP
#define VOLAUG_VOLAUG_HPP

#include "volaug/config.hpp"
#include "volaug/error.hpp"
#include "volaug/geometry.hpp"
#include "volaug/grid.hpp"
#include "volaug/intensity.hpp"
#include "volaug/metrics.hpp"
#include "volaug/parallel.hpp"
#include "volaug/phantom.hpp"
#include "volaug/random.hpp"
#include "volaug/random_conv.hpp"
#include "volaug/resample.hpp"
#include "volaug/source_match.hpp"
#include "volaug/src_augment.hpp"
#include "volaug/svol.hpp"

#endif  // VOLAUG_VOLAUG_HPP
