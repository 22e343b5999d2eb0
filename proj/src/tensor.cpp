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

#include "textdistill/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

thread_local bool tls_grad_enabled = true;
thread_local std::uint64_t tls_next_seq = 0;

const detail::TensorImpl& checked(const std::shared_ptr<detail::TensorImpl>& p) {
  if (!p) throw UsageError("operation on an undefined tensor");
  return *p;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), Real(0), requires_grad);
}

Tensor Tensor::full(Shape shape, Real value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from_values(std::move(shape), std::vector<Real>(n, value),
                     requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<Real> values,
                           bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("zero-sized dimension in " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " holds " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::vector(std::initializer_list<Real> values, bool requires_grad) {
  return from_values({values.size()}, std::vector<Real>(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<Real>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<Real> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return from_values({r, c}, std::move(values), requires_grad);
}

Tensor Tensor::scalar(Real value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return checked(impl_).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_str(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return checked(impl_).data.size(); }

std::span<const Real> Tensor::values() const { return checked(impl_).data; }

std::span<Real> Tensor::mutable_values() {
  checked(impl_);
  return impl_->data;
}

Real Tensor::at(std::size_t i) const { return values()[i]; }

Real Tensor::at(std::size_t row, std::size_t col) const {
  return values()[row * dim(1) + col];
}

Real Tensor::item() const {
  if (numel() != 1) {
    throw UsageError("item() on tensor of shape " + shape_str(shape()));
  }
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return checked(impl_).requires_grad; }

void Tensor::set_requires_grad(bool on) {
  checked(impl_);
  impl_->requires_grad = on;
}

bool Tensor::is_leaf() const { return checked(impl_).producer == nullptr; }

bool Tensor::has_grad() const { return !checked(impl_).grad.empty(); }

std::span<const Real> Tensor::grad() const { return checked(impl_).grad; }

std::span<Real> Tensor::mutable_grad() {
  checked(impl_);
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), Real(0));
  return impl_->grad;
}

void Tensor::zero_grad() {
  checked(impl_);
  impl_->grad.clear();
}

Tensor Tensor::detach() const {
  const auto& src = checked(impl_);
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = src.shape;
  impl->data = src.data;
  return Tensor(std::move(impl));
}

Tensor Tensor::clone() const {
  Tensor out = detach();
  out.impl_->requires_grad = impl_->requires_grad;
  return out;
}

void Tensor::backward() const {
  const auto& root = checked(impl_);
  if (root.data.size() != 1) {
    throw UsageError("backward() needs a scalar root, got shape " +
                     shape_str(root.shape));
  }
  if (!root.requires_grad) {
    throw UsageError("backward() on a tensor that does not require grad");
  }

  // Collect every recorded node reachable from the root.
  std::vector<std::shared_ptr<detail::TensorImpl>> produced;
  std::unordered_set<const detail::TensorImpl*> seen;
  std::vector<std::shared_ptr<detail::TensorImpl>> stack{impl_};
  seen.insert(impl_.get());
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (!cur->producer) continue;
    for (const auto& in : cur->producer->inputs) {
      if (seen.insert(in.get()).second) stack.push_back(in);
    }
    produced.push_back(std::move(cur));
  }
  std::sort(produced.begin(), produced.end(),
            [](const auto& a, const auto& b) {
              return a->producer->seq > b->producer->seq;
            });

  if (impl_->grad.empty()) impl_->grad.assign(1, Real(0));
  impl_->grad[0] += Real(1);

  for (const auto& out : produced) {
    if (out->grad.empty()) out->grad.assign(out->data.size(), Real(0));
    const auto& node = *out->producer;
    for (const auto& in : node.inputs) {
      if (in->requires_grad && in->grad.empty()) {
        in->grad.assign(in->data.size(), Real(0));
      }
    }
    node.backward(*out);
  }
  for (const auto& out : produced) out->producer.reset();
}

NoGradGuard::NoGradGuard() : previous_(tls_grad_enabled) {
  tls_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { tls_grad_enabled = previous_; }

bool grad_enabled() { return tls_grad_enabled; }

namespace detail {

namespace {

Tensor finish(Shape shape, std::vector<Real> data,
              std::vector<std::shared_ptr<TensorImpl>> inputs,
              std::function<void(const TensorImpl&)> backward) {
  Tensor out = Tensor::from_values(std::move(shape), std::move(data));
  bool any = false;
  for (const auto& in : inputs) any = any || in->requires_grad;
  if (!tls_grad_enabled || !any) return out;
  auto node = std::make_shared<Node>();
  node->seq = tls_next_seq++;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.impl()->requires_grad = true;
  out.impl()->producer = std::move(node);
  return out;
}

}  // namespace

Tensor make_result(Shape shape, std::vector<Real> data,
                   std::initializer_list<const Tensor*> inputs,
                   std::function<void(const TensorImpl&)> backward) {
  std::vector<std::shared_ptr<TensorImpl>> ins;
  ins.reserve(inputs.size());
  for (const Tensor* t : inputs) {
    checked(t->impl());
    ins.push_back(t->impl());
  }
  return finish(std::move(shape), std::move(data), std::move(ins),
                std::move(backward));
}

Tensor make_result(Shape shape, std::vector<Real> data,
                   const std::vector<Tensor>& inputs,
                   std::function<void(const TensorImpl&)> backward) {
  std::vector<std::shared_ptr<TensorImpl>> ins;
  ins.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    checked(t.impl());
    ins.push_back(t.impl());
  }
  return finish(std::move(shape), std::move(data), std::move(ins),
                std::move(backward));
}

std::uint64_t recorded_node_count() { return tls_next_seq; }

}  // namespace detail

}  // namespace textdistill
