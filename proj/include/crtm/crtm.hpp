// Copyright 2026 The CRTM Authors.
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

#include "crtm/common.hpp"
#include "crtm/config.hpp"
#include "crtm/context.hpp"
#include "crtm/embeddings.hpp"
#include "crtm/eval.hpp"
#include "crtm/markup.hpp"
#include "crtm/model.hpp"
#include "crtm/network.hpp"
#include "crtm/predict.hpp"
#include "crtm/relational.hpp"
#include "crtm/special.hpp"
#include "crtm/split.hpp"
#include "crtm/synthetic.hpp"
#include "crtm/tokenize.hpp"
#include "crtm/topics.hpp"
#include "crtm/trainer.hpp"
