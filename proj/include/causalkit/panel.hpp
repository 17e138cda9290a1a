// Copyright 2026 The causalkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CAUSALKIT_PANEL_HPP_
#define CAUSALKIT_PANEL_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "causalkit/core.hpp"

namespace causalkit {

enum class PanelMethod { kPOLS, kRE, kFE, kFD, kCRE };

std::string_view panel_method_name(PanelMethod method);

struct PanelSpec {
  PanelMethod method = PanelMethod::kFE;
  bool include_intercept = true;  // ignored by FE, which demeans
  // Columns of x to include; nullopt means all of them.
  std::optional<std::vector<Index>> covariates;
};

// Linear panel regression of y on d (and x); point is the coefficient on d.
//   POLS  pooled OLS on (1, d, x)
//   RE    feasible GLS with Swamy-Arora variance components
//   FE    OLS on unit-demeaned (d, x)
//   FD    OLS of first differences on (1, dd, dx)
//   CRE   pooled OLS on (1, d, x, unit mean of d, unit means of x)
CausalEstimate fit_panel(const PanelDataset& pds, const PanelSpec& spec);

}  // namespace causalkit

#endif  // CAUSALKIT_PANEL_HPP_
