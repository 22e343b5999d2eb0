// Copyright 2026 The textdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "textdistill/tensor.hpp"

namespace textdistill {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers for one parameter tensor.
struct AdamState {
  std::vector<Real> m;
  std::vector<Real> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update of `param` from its accumulated grad.
// A parameter without a grad is treated as having a zero gradient.
void adam_step(Tensor& param, AdamState& state, const AdamConfig& config);

// Adam over groups of parameters that each carry their own learning rate.
class Adam {
 public:
  explicit Adam(AdamConfig defaults = {});

  void add_group(std::vector<Tensor> params, double lr);
  void step();
  void zero_grad();
  std::size_t parameter_count() const;

 private:
  struct Group {
    std::vector<Tensor> params;
    std::vector<AdamState> states;
    AdamConfig config;
  };
  AdamConfig defaults_;
  std::vector<Group> groups_;
};

}  // namespace textdistill
