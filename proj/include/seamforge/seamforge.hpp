/*
 * Copyright (C) 2026 The Seamforge Authors
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

#pragma once

#include "seamforge/core.hpp"
#include "seamforge/crop.hpp"
#include "seamforge/edges.hpp"
#include "seamforge/error.hpp"
#include "seamforge/eval.hpp"
#include "seamforge/features.hpp"
#include "seamforge/io.hpp"
#include "seamforge/kdtree.hpp"
#include "seamforge/path_fit.hpp"
#include "seamforge/pipeline.hpp"
#include "seamforge/preprocess.hpp"
#include "seamforge/region_grow.hpp"
#include "seamforge/synth.hpp"
