// Copyright 2026 The treedet Authors
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

#include "treedet/designer.hpp"
#include "treedet/error.hpp"
#include "treedet/experiments.hpp"
#include "treedet/fusion.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/io.hpp"
#include "treedet/oracle.hpp"
#include "treedet/propagation.hpp"
#include "treedet/quantizer.hpp"
#include "treedet/random_instance.hpp"
#include "treedet/topology.hpp"
