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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace textdistill {

// Training runs in 32-bit floats. Building with TEXTDISTILL_FLOAT64 switches
// every tensor in the library to 64-bit, which is how gradient verification
// gets tight finite-difference tolerances.
#ifdef TEXTDISTILL_FLOAT64
using Real = double;
#else
using Real = float;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl;

// One recorded operation. `seq` is the insertion index on the current
// thread; backward replays nodes in strictly decreasing `seq`.
struct Node {
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  // Receives the output tensor (value and accumulated grad) and adds the
  // input contributions into inputs[i]->grad.
  std::function<void(const TensorImpl& out)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // empty until a backward pass reaches it
  bool requires_grad = false;
  std::shared_ptr<Node> producer;
};

}  // namespace detail

// Dense row-major tensor handle. Copies share storage; use clone() for a
// deep copy. Operations on tensors live in ops.hpp.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<Real> values,
                            bool requires_grad = false);
  static Tensor vector(std::initializer_list<Real> values,
                       bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows,
                       bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const Real> values() const;
  // Direct write access; meant for parameter initialization and optimizer
  // updates on leaves, never for tensors inside a live graph.
  std::span<Real> mutable_values();
  Real at(std::size_t i) const;
  Real at(std::size_t row, std::size_t col) const;
  Real item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  void zero_grad();

  // Same values, no history, requires_grad == false.
  Tensor detach() const;
  // Deep copy of values; keeps requires_grad, drops history and grad.
  Tensor clone() const;

  // Reverse-mode pass from a single-element tensor. Every reachable tensor
  // with requires_grad receives an accumulated grad; the recorded history
  // is released afterwards.
  void backward() const;

  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

// Builds an op result. A node is recorded only when grad mode is on and at
// least one input requires grad.
Tensor make_result(Shape shape, std::vector<Real> data,
                   std::initializer_list<const Tensor*> inputs,
                   std::function<void(const TensorImpl&)> backward);
Tensor make_result(Shape shape, std::vector<Real> data,
                   const std::vector<Tensor>& inputs,
                   std::function<void(const TensorImpl&)> backward);

// Number of nodes recorded on this thread so far.
std::uint64_t recorded_node_count();

}  // namespace detail

}  // namespace textdistill
