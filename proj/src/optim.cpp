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

#include "textdistill/optim.hpp"

#include <cmath>
#include <string>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

void validate(const AdamConfig& c) {
  if (!(c.lr > 0.0)) {
    throw ConfigError("adam: learning rate must be positive, got " + std::to_string(c.lr));
  }
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(c.eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

}  // namespace

void adam_step(Tensor& param, AdamState& state, const AdamConfig& config) {
  validate(config);
  const std::size_t n = param.numel();
  if (state.m.empty()) {
    state.m.assign(n, Real(0));
    state.v.assign(n, Real(0));
  }
  if (state.m.size() != n || state.v.size() != n) {
    throw DimensionError("adam: state buffers hold " + std::to_string(state.m.size()) +
                         " values for a parameter of shape " + shape_str(param.shape()));
  }
  ++state.step;
  const Real b1 = static_cast<Real>(config.beta1);
  const Real b2 = static_cast<Real>(config.beta2);
  const Real c1 = static_cast<Real>(1.0 - std::pow(config.beta1, static_cast<double>(state.step)));
  const Real c2 = static_cast<Real>(1.0 - std::pow(config.beta2, static_cast<double>(state.step)));
  const Real lr = static_cast<Real>(config.lr);
  const Real eps = static_cast<Real>(config.eps);
  const auto g = param.grad();
  const bool has_grad = !g.empty();
  auto w = param.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    const Real gi = has_grad ? g[i] : Real(0);
    state.m[i] = b1 * state.m[i] + (Real(1) - b1) * gi;
    state.v[i] = b2 * state.v[i] + (Real(1) - b2) * gi * gi;
    const Real m_hat = state.m[i] / c1;
    const Real v_hat = state.v[i] / c2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

Adam::Adam(AdamConfig defaults) : defaults_(defaults) { validate(defaults_); }

void Adam::add_group(std::vector<Tensor> params, double lr) {
  Group g;
  g.config = defaults_;
  g.config.lr = lr;
  validate(g.config);
  g.states.resize(params.size());
  g.params = std::move(params);
  groups_.push_back(std::move(g));
}

void Adam::step() {
  for (Group& g : groups_) {
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      adam_step(g.params[i], g.states[i], g.config);
    }
  }
}

void Adam::zero_grad() {
  for (Group& g : groups_) {
    for (Tensor& p : g.params) p.zero_grad();
  }
}

std::size_t Adam::parameter_count() const {
  std::size_t n = 0;
  for (const Group& g : groups_) {
    for (const Tensor& p : g.params) n += p.numel();
  }
  return n;
}

}  // namespace textdistill
