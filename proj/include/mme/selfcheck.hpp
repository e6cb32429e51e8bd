// Copyright 2026 The MME Authors. All Rights Reserved.
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
// =============================================================================

#ifndef MME_SELFCHECK_HPP_
#define MME_SELFCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace mme {

struct SelfcheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // worst observed discrepancy
  double tolerance = 0.0;  // allowed discrepancy
  std::string detail;
};

// Runtime property suites:
//   posterior_inverse   predict_joint vs a direct (K + sigma^2 I)^{-1} computation
//   evidence_gradient   analytic gradient vs central finite differences
//   proxy_bound         sampled argmin frequency <= proxy score + 3 standard errors
std::vector<SelfcheckResult> run_selfcheck(std::uint64_t seed, int bound_samples = 100000);

}  // namespace mme

#endif  // MME_SELFCHECK_HPP_
