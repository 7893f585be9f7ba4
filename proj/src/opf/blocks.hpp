// Copyright 2026 The steplearn Authors
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

#include <string>
#include <vector>

#include "steplearn/opf.hpp"

namespace steplearn {

OperationBlock append_operation_block(MilpProblem& p, const Network& net,
                                      const NodeOperatingContext& ctx, double weight,
                                      const std::vector<std::size_t>* built_vars,
                                      const std::string& prefix);

}  // namespace steplearn
