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

#include "textdistill/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "textdistill/errors.hpp"

namespace textdistill {

using detail::TensorImpl;
using detail::make_result;

namespace {

thread_local FlopCounter* tls_flop_counter = nullptr;

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_finite(const Tensor& t, const char* op) {
  for (Real v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite input");
    }
  }
}

// Rows/cols view of a rank-1 or rank-2 tensor for row-wise ops.
std::pair<std::size_t, std::size_t> rows_cols(const Tensor& t, const char* op) {
  if (t.rank() == 1) return {1, t.dim(0)};
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " +
                       shape_str(t.shape()));
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  std::vector<Real> out(a.numel());
  const auto x = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
  count_flops(0, out.size());
  TensorImpl* ai = a.impl().get();
  return make_result(a.shape(), std::move(out), {&a},
                     [ai, deriv](const TensorImpl& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) {
                         ai->grad[i] += o.grad[i] * deriv(ai->data[i], o.data[i]);
                       }
                     });
}

}  // namespace

FlopCounter::FlopCounter() : previous_(tls_flop_counter) {
  tls_flop_counter = this;
}

FlopCounter::~FlopCounter() { tls_flop_counter = previous_; }

void count_flops(std::uint64_t mul_add, std::uint64_t elementwise) {
  for (FlopCounter* c = tls_flop_counter; c != nullptr; c = c->previous_) {
    c->counts_.mul_add += mul_add;
    c->counts_.elementwise += elementwise;
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ: " +
                         shape_str(a.shape()) + " * " + shape_str(b.shape()));
  }
  std::vector<Real> out(m * n, Real(0));
  const Real* A = a.values().data();
  const Real* B = b.values().data();
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const Real* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += aip * static_cast<double>(brow[j]);
    }
    Real* c = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) c[j] = static_cast<Real>(acc[j]);
  }
  count_flops(2ULL * m * k * n, 0);
  TensorImpl* ai = a.impl().get();
  TensorImpl* bi = b.impl().get();
  return make_result({m, n}, std::move(out), {&a, &b},
                     [ai, bi, m, k, n](const TensorImpl& o) {
    const Real* g = o.grad.data();
    if (ai->requires_grad) {
      const Real* B = bi->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          Real s = 0;
          const Real* grow = g + i * n;
          const Real* brow = B + p * n;
          for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
          ai->grad[i * k + p] += s;
        }
      }
    }
    if (bi->requires_grad) {
      const Real* A = ai->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const Real* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const Real aip = A[i * k + p];
          Real* dst = bi->grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) dst[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<Real> out(m * n);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  }
  TensorImpl* ai = a.impl().get();
  return make_result({n, m}, std::move(out), {&a},
                     [ai, m, n](const TensorImpl& o) {
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           ai->grad[i * n + j] += o.grad[j * m + i];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<Real> out(a.values().begin(), a.values().end());
  TensorImpl* ai = a.impl().get();
  return make_result(std::move(shape), std::move(out), {&a},
                     [ai](const TensorImpl& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> out(a.numel());
  const auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  count_flops(0, out.size());
  TensorImpl* ai = a.impl().get();
  TensorImpl* bi = b.impl().get();
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [ai, bi](const TensorImpl& o) {
                       if (ai->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
                       }
                       if (bi->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) bi->grad[i] += o.grad[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<Real> out(a.numel());
  const auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  count_flops(0, out.size());
  TensorImpl* ai = a.impl().get();
  TensorImpl* bi = b.impl().get();
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [ai, bi](const TensorImpl& o) {
                       if (ai->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
                       }
                       if (bi->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) bi->grad[i] -= o.grad[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> out(a.numel());
  const auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  count_flops(0, out.size());
  TensorImpl* ai = a.impl().get();
  TensorImpl* bi = b.impl().get();
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [ai, bi](const TensorImpl& o) {
                       if (ai->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) {
                           ai->grad[i] += o.grad[i] * bi->data[i];
                         }
                       }
                       if (bi->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) {
                           bi->grad[i] += o.grad[i] * ai->data[i];
                         }
                       }
                     });
}

Tensor scale(const Tensor& a, Real factor) {
  return unary(
      a, [factor](Real x) { return x * factor; },
      [factor](Real, Real) { return factor; });
}

Tensor add_rowwise(const Tensor& a, const Tensor& row_vec) {
  const auto [m, n] = rows_cols(a, "add_rowwise");
  require_rank(row_vec, 1, "add_rowwise");
  if (row_vec.dim(0) != n) {
    throw DimensionError("add_rowwise: " + shape_str(a.shape()) + " + " +
                         shape_str(row_vec.shape()));
  }
  std::vector<Real> out(a.numel());
  const auto x = a.values(), r = row_vec.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + r[j];
  }
  count_flops(0, out.size());
  TensorImpl* ai = a.impl().get();
  TensorImpl* ri = row_vec.impl().get();
  return make_result(a.shape(), std::move(out), {&a, &row_vec},
                     [ai, ri, m = m, n = n](const TensorImpl& o) {
                       if (ai->requires_grad) {
                         for (std::size_t i = 0; i < o.grad.size(); ++i) ai->grad[i] += o.grad[i];
                       }
                       if (ri->requires_grad) {
                         for (std::size_t i = 0; i < m; ++i) {
                           for (std::size_t j = 0; j < n; ++j) ri->grad[j] += o.grad[i * n + j];
                         }
                       }
                     });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](Real x) { return x > Real(0) ? x : Real(0); },
      [](Real x, Real) { return x > Real(0) ? Real(1) : Real(0); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::tanh(x); },
      [](Real, Real y) { return Real(1) - y * y; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](Real x) { return x * x; }, [](Real x, Real) { return Real(2) * x; });
}

Tensor log_floor(const Tensor& a, Real floor) {
  return unary(
      a, [floor](Real x) { return std::log(std::max(x, floor)); },
      [floor](Real x, Real) { return x > floor ? Real(1) / x : Real(0); });
}

namespace {

// Shared row-wise softmax; keep may be empty (no mask).
Tensor softmax_impl(const Tensor& logits, const std::vector<bool>& keep,
                    const char* op) {
  const auto [rows, cols] = rows_cols(logits, op);
  require_finite(logits, op);
  if (!keep.empty()) {
    if (keep.size() != cols) {
      throw DimensionError(std::string(op) + ": mask length " +
                           std::to_string(keep.size()) + " vs " +
                           std::to_string(cols) + " columns");
    }
    if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) {
      throw PreconditionError(std::string(op) + ": every column is masked");
    }
  }
  std::vector<Real> out(logits.numel(), Real(0));
  const auto x = logits.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.data() + r * cols;
    Real* y = out.data() + r * cols;
    Real mx = -std::numeric_limits<Real>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep.empty() || keep[c]) mx = std::max(mx, in[c]);
    }
    double total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep.empty() || keep[c]) total += std::exp(static_cast<double>(in[c] - mx));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep.empty() || keep[c]) {
        y[c] = static_cast<Real>(std::exp(static_cast<double>(in[c] - mx)) / total);
      }
    }
  }
  count_flops(0, 3 * out.size());
  TensorImpl* li = logits.impl().get();
  return make_result(logits.shape(), std::move(out), {&logits},
                     [li, rows = rows, cols = cols](const TensorImpl& o) {
                       for (std::size_t r = 0; r < rows; ++r) {
                         const Real* y = o.data.data() + r * cols;
                         const Real* g = o.grad.data() + r * cols;
                         Real dot = 0;
                         for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
                         Real* dst = li->grad.data() + r * cols;
                         for (std::size_t c = 0; c < cols; ++c) dst[c] += y[c] * (g[c] - dot);
                       }
                     });
}

}  // namespace

Tensor softmax(const Tensor& logits) { return softmax_impl(logits, {}, "softmax"); }

Tensor masked_softmax(const Tensor& scores, const std::vector<bool>& keep) {
  return softmax_impl(scores, keep, "masked_softmax");
}

Tensor log_softmax(const Tensor& logits) {
  const auto [rows, cols] = rows_cols(logits, "log_softmax");
  require_finite(logits, "log_softmax");
  std::vector<Real> out(logits.numel());
  const auto x = logits.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* in = x.data() + r * cols;
    Real mx = in[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(static_cast<double>(in[c] - mx));
    const double lse = static_cast<double>(mx) + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = static_cast<Real>(in[c] - lse);
  }
  count_flops(0, 3 * out.size());
  TensorImpl* li = logits.impl().get();
  return make_result(logits.shape(), std::move(out), {&logits},
                     [li, rows = rows, cols = cols](const TensorImpl& o) {
                       for (std::size_t r = 0; r < rows; ++r) {
                         const Real* ly = o.data.data() + r * cols;
                         const Real* g = o.grad.data() + r * cols;
                         Real gsum = 0;
                         for (std::size_t c = 0; c < cols; ++c) gsum += g[c];
                         Real* dst = li->grad.data() + r * cols;
                         for (std::size_t c = 0; c < cols; ++c) {
                           dst[c] += g[c] - std::exp(ly[c]) * gsum;
                         }
                       }
                     });
}

Tensor sum(const Tensor& a) {
  double total = 0;
  for (Real v : a.values()) total += v;
  count_flops(0, a.numel());
  TensorImpl* ai = a.impl().get();
  return make_result({1}, {static_cast<Real>(total)}, {&a}, [ai](const TensorImpl& o) {
    for (Real& g : ai->grad) g += o.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const Real inv = Real(1) / static_cast<Real>(a.numel());
  double total = 0;
  for (Real v : a.values()) total += v;
  count_flops(0, a.numel());
  TensorImpl* ai = a.impl().get();
  return make_result({1}, {static_cast<Real>(total / static_cast<double>(a.numel()))}, {&a}, [ai, inv](const TensorImpl& o) {
    for (Real& g : ai->grad) g += o.grad[0] * inv;
  });
}

Tensor mean_rows(const Tensor& a, const std::vector<bool>& keep) {
  require_rank(a, 2, "mean_rows");
  const std::size_t n = a.dim(0), d = a.dim(1);
  if (!keep.empty() && keep.size() != n) {
    throw DimensionError("mean_rows: mask length " + std::to_string(keep.size()) +
                         " vs " + std::to_string(n) + " rows");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (keep.empty() || keep[i]) ? 1 : 0;
  if (count == 0) throw PreconditionError("mean_rows: no rows selected");
  const Real inv = Real(1) / static_cast<Real>(count);
  std::vector<Real> out(d, Real(0));
  const auto x = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep.empty() && !keep[i]) continue;
    for (std::size_t j = 0; j < d; ++j) out[j] += x[i * d + j];
  }
  for (Real& v : out) v *= inv;
  count_flops(0, count * d);
  TensorImpl* ai = a.impl().get();
  return make_result({d}, std::move(out), {&a},
                     [ai, keep, n, d, inv](const TensorImpl& o) {
                       for (std::size_t i = 0; i < n; ++i) {
                         if (!keep.empty() && !keep[i]) continue;
                         for (std::size_t j = 0; j < d; ++j) {
                           ai->grad[i * d + j] += o.grad[j] * inv;
                         }
                       }
                     });
}

Tensor row(const Tensor& a, std::size_t index) {
  require_rank(a, 2, "row");
  const std::size_t n = a.dim(0), d = a.dim(1);
  if (index >= n) {
    throw DimensionError("row: index " + std::to_string(index) + " out of " +
                         shape_str(a.shape()));
  }
  const auto x = a.values();
  std::vector<Real> out(x.begin() + index * d, x.begin() + (index + 1) * d);
  TensorImpl* ai = a.impl().get();
  return make_result({d}, std::move(out), {&a},
                     [ai, index, d](const TensorImpl& o) {
                       for (std::size_t j = 0; j < d; ++j) ai->grad[index * d + j] += o.grad[j];
                     });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank(a, 2, "slice_cols");
  const std::size_t n = a.dim(0), d = a.dim(1);
  if (begin >= end || end > d) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of " + shape_str(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<Real> out(n * w);
  const auto x = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(x.begin() + i * d + begin, w, out.begin() + i * w);
  }
  TensorImpl* ai = a.impl().get();
  return make_result({n, w}, std::move(out), {&a},
                     [ai, n, d, w, begin](const TensorImpl& o) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < w; ++j) {
                           ai->grad[i * d + begin + j] += o.grad[i * w + j];
                         }
                       }
                     });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != n) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(p.shape()));
    }
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  std::vector<Real> out(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto x = parts[k].values();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(x.begin() + i * widths[k], widths[k],
                  out.begin() + i * total + offset);
    }
    offset += widths[k];
  }
  std::vector<TensorImpl*> impls;
  for (const Tensor& p : parts) impls.push_back(p.impl().get());
  return make_result({n, total}, std::move(out), parts,
                     [impls, widths, n, total](const TensorImpl& o) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         if (impls[k]->requires_grad) {
                           for (std::size_t i = 0; i < n; ++i) {
                             for (std::size_t j = 0; j < widths[k]; ++j) {
                               impls[k]->grad[i * widths[k] + j] +=
                                   o.grad[i * total + offset + j];
                             }
                           }
                         }
                         offset += widths[k];
                       }
                     });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::vector<Real> out;
  std::vector<std::size_t> sizes;
  for (const Tensor& p : parts) {
    require_rank(p, 1, "concat");
    const auto x = p.values();
    out.insert(out.end(), x.begin(), x.end());
    sizes.push_back(p.numel());
  }
  std::vector<TensorImpl*> impls;
  for (const Tensor& p : parts) impls.push_back(p.impl().get());
  const std::size_t total = out.size();
  return make_result({total}, std::move(out), parts,
                     [impls, sizes](const TensorImpl& o) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         if (impls[k]->requires_grad) {
                           for (std::size_t j = 0; j < sizes[k]; ++j) {
                             impls[k]->grad[j] += o.grad[offset + j];
                           }
                         }
                         offset += sizes[k];
                       }
                     });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no inputs");
  const std::size_t d = rows[0].numel();
  std::vector<Real> out;
  out.reserve(rows.size() * d);
  for (const Tensor& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.numel() != d) {
      throw DimensionError("stack_rows: " + shape_str(rows[0].shape()) + " vs " +
                           shape_str(r.shape()));
    }
    const auto x = r.values();
    out.insert(out.end(), x.begin(), x.end());
  }
  std::vector<TensorImpl*> impls;
  for (const Tensor& r : rows) impls.push_back(r.impl().get());
  return make_result({rows.size(), d}, std::move(out), rows,
                     [impls, d](const TensorImpl& o) {
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         if (!impls[k]->requires_grad) continue;
                         for (std::size_t j = 0; j < d; ++j) {
                           impls[k]->grad[j] += o.grad[k * d + j];
                         }
                       }
                     });
}

Tensor pick(const Tensor& a, std::span<const int> labels) {
  const auto [rows, cols] = rows_cols(a, "pick");
  if (labels.size() != rows) {
    throw DimensionError("pick: " + std::to_string(labels.size()) +
                         " labels for " + shape_str(a.shape()));
  }
  std::vector<Real> out(rows);
  std::vector<std::size_t> index(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= cols) {
      throw DataError("label " + std::to_string(labels[r]) +
                      " out of range for " + std::to_string(cols) + " classes");
    }
    index[r] = r * cols + static_cast<std::size_t>(labels[r]);
    out[r] = a.values()[index[r]];
  }
  TensorImpl* ai = a.impl().get();
  return make_result({rows}, std::move(out), {&a},
                     [ai, index](const TensorImpl& o) {
                       for (std::size_t r = 0; r < index.size(); ++r) ai->grad[index[r]] += o.grad[r];
                     });
}

Tensor embedding_lookup(const Tensor& table, std::span<const TokenId> ids,
                        TokenId frozen_id) {
  require_rank(table, 2, "embedding_lookup");
  if (ids.empty()) throw PreconditionError("embedding_lookup: empty id sequence");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<Real> out(ids.size() * d);
  const auto t = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw PreconditionError("embedding_lookup: id " + std::to_string(ids[i]) +
                              " outside vocabulary of " + std::to_string(vocab));
    }
    std::copy_n(t.begin() + static_cast<std::size_t>(ids[i]) * d, d,
                out.begin() + i * d);
  }
  TensorImpl* ti = table.impl().get();
  std::vector<TokenId> saved(ids.begin(), ids.end());
  return make_result({ids.size(), d}, std::move(out), {&table},
                     [ti, saved, d, frozen_id](const TensorImpl& o) {
                       for (std::size_t i = 0; i < saved.size(); ++i) {
                         if (saved[i] == frozen_id) continue;
                         Real* dst = ti->grad.data() + static_cast<std::size_t>(saved[i]) * d;
                         for (std::size_t j = 0; j < d; ++j) dst[j] += o.grad[i * d + j];
                       }
                     });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Real eps) {
  const auto [n, d] = rows_cols(x, "layer_norm");
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw DimensionError("layer_norm: affine params " + shape_str(gamma.shape()) +
                         "/" + shape_str(beta.shape()) + " for input " +
                         shape_str(x.shape()));
  }
  std::vector<Real> out(x.numel()), xhat(x.numel()), inv_std(n);
  const auto in = x.values(), g = gamma.values(), b = beta.values();
  for (std::size_t i = 0; i < n; ++i) {
    const Real* r = in.data() + i * d;
    double mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += r[j];
    mu /= static_cast<double>(d);
    double var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (r[j] - mu) * (r[j] - mu);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    inv_std[i] = static_cast<Real>(inv);
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (r[j] - mu) * inv;
      xhat[i * d + j] = static_cast<Real>(xh);
      out[i * d + j] = static_cast<Real>(g[j] * xh + b[j]);
    }
  }
  count_flops(0, 8 * out.size());
  TensorImpl* xi = x.impl().get();
  TensorImpl* gi = gamma.impl().get();
  TensorImpl* bi = beta.impl().get();
  return make_result(x.shape(), std::move(out), {&x, &gamma, &beta},
                     [xi, gi, bi, xhat, inv_std, n = n, d = d](const TensorImpl& o) {
    const Real inv_d = Real(1) / static_cast<Real>(d);
    for (std::size_t i = 0; i < n; ++i) {
      const Real* dy = o.grad.data() + i * d;
      const Real* xh = xhat.data() + i * d;
      if (gi->requires_grad) {
        for (std::size_t j = 0; j < d; ++j) gi->grad[j] += dy[j] * xh[j];
      }
      if (bi->requires_grad) {
        for (std::size_t j = 0; j < d; ++j) bi->grad[j] += dy[j];
      }
      if (xi->requires_grad) {
        Real mean_dxh = 0, mean_dxh_xh = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const Real dxh = dy[j] * gi->data[j];
          mean_dxh += dxh;
          mean_dxh_xh += dxh * xh[j];
        }
        mean_dxh *= inv_d;
        mean_dxh_xh *= inv_d;
        for (std::size_t j = 0; j < d; ++j) {
          const Real dxh = dy[j] * gi->data[j];
          xi->grad[i * d + j] += inv_std[i] * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
        }
      }
    }
  });
}

Tensor dropout(const Tensor& x, Real p, Rng& rng) {
  if (p < Real(0) || p >= Real(1)) {
    throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(p));
  }
  if (p == Real(0)) return x;
  const Real keep_scale = Real(1) / (Real(1) - p);
  std::vector<Real> mask(x.numel());
  for (Real& m : mask) m = bernoulli(rng, static_cast<double>(p)) ? Real(0) : keep_scale;
  std::vector<Real> out(x.numel());
  const auto in = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * mask[i];
  count_flops(0, out.size());
  TensorImpl* xi = x.impl().get();
  return make_result(x.shape(), std::move(out), {&x},
                     [xi, mask](const TensorImpl& o) {
                       for (std::size_t i = 0; i < mask.size(); ++i) xi->grad[i] += o.grad[i] * mask[i];
                     });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t width) {
  require_rank(x, 2, "conv1d");
  require_rank(weight, 2, "conv1d");
  require_rank(bias, 1, "conv1d");
  const std::size_t n = x.dim(0), d = x.dim(1), ch = weight.dim(1);
  if (width == 0) throw ConfigError("conv1d: filter width must be positive");
  if (weight.dim(0) != width * d || bias.dim(0) != ch) {
    throw DimensionError("conv1d: weight " + shape_str(weight.shape()) + ", bias " +
                         shape_str(bias.shape()) + " for width " +
                         std::to_string(width) + " over " + shape_str(x.shape()));
  }
  if (n < width) {
    throw PreconditionError("conv1d: sequence length " + std::to_string(n) +
                            " shorter than filter width " + std::to_string(width));
  }
  const std::size_t t_out = n - width + 1, kd = width * d;
  std::vector<Real> out(t_out * ch);
  const Real* X = x.values().data();
  const Real* W = weight.values().data();
  const Real* B = bias.values().data();
  std::vector<double> acc(ch);
  for (std::size_t t = 0; t < t_out; ++t) {
    std::copy_n(B, ch, acc.begin());
    const Real* window = X + t * d;
    for (std::size_t r = 0; r < kd; ++r) {
      const double xv = window[r];
      const Real* wrow = W + r * ch;
      for (std::size_t c = 0; c < ch; ++c) acc[c] += xv * static_cast<double>(wrow[c]);
    }
    std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(t * ch));
  }
  count_flops(2ULL * kd * ch * t_out, out.size());
  TensorImpl* xi = x.impl().get();
  TensorImpl* wi = weight.impl().get();
  TensorImpl* bi = bias.impl().get();
  return make_result({t_out, ch}, std::move(out), {&x, &weight, &bias},
                     [xi, wi, bi, t_out, kd, ch, d](const TensorImpl& o) {
    for (std::size_t t = 0; t < t_out; ++t) {
      const Real* g = o.grad.data() + t * ch;
      if (bi->requires_grad) {
        for (std::size_t c = 0; c < ch; ++c) bi->grad[c] += g[c];
      }
      if (wi->requires_grad) {
        const Real* window = xi->data.data() + t * d;
        for (std::size_t r = 0; r < kd; ++r) {
          const Real xv = window[r];
          Real* dst = wi->grad.data() + r * ch;
          for (std::size_t c = 0; c < ch; ++c) dst[c] += xv * g[c];
        }
      }
      if (xi->requires_grad) {
        Real* dwin = xi->grad.data() + t * d;
        for (std::size_t r = 0; r < kd; ++r) {
          const Real* wrow = wi->data.data() + r * ch;
          Real s = 0;
          for (std::size_t c = 0; c < ch; ++c) s += wrow[c] * g[c];
          dwin[r] += s;
        }
      }
    }
  });
}

Tensor maxpool_over_time(const Tensor& feature_map) {
  if (feature_map.rank() != 2) {
    throw DimensionError("maxpool_over_time: expected [t x channels], got " +
                         shape_str(feature_map.shape()));
  }
  const std::size_t t = feature_map.dim(0), ch = feature_map.dim(1);
  std::vector<Real> out(ch);
  std::vector<std::size_t> argmax(ch, 0);
  const auto x = feature_map.values();
  for (std::size_t c = 0; c < ch; ++c) {
    Real best = x[c];
    for (std::size_t i = 1; i < t; ++i) {
      if (x[i * ch + c] > best) {
        best = x[i * ch + c];
        argmax[c] = i;
      }
    }
    out[c] = best;
  }
  count_flops(0, t * ch);
  TensorImpl* fi = feature_map.impl().get();
  return make_result({ch}, std::move(out), {&feature_map},
                     [fi, argmax, ch](const TensorImpl& o) {
                       for (std::size_t c = 0; c < ch; ++c) fi->grad[argmax[c] * ch + c] += o.grad[c];
                     });
}

std::vector<Tensor> conv1d_bank(const Tensor& embeddings,
                                const std::vector<ConvFilterBank>& banks) {
  std::size_t widest = 0;
  for (const auto& b : banks) widest = std::max(widest, b.width);
  if (embeddings.rank() == 2 && embeddings.dim(0) < widest) {
    throw PreconditionError("conv1d_bank: sequence length " +
                            std::to_string(embeddings.dim(0)) +
                            " shorter than largest filter " + std::to_string(widest));
  }
  std::vector<Tensor> maps;
  maps.reserve(banks.size());
  for (const auto& b : banks) maps.push_back(conv1d(embeddings, b.weight, b.bias, b.width));
  return maps;
}

Tensor multi_head_attention(const Tensor& x, const AttentionParams& p,
                            std::size_t heads, const std::vector<bool>& key_keep) {
  require_rank(x, 2, "multi_head_attention");
  const std::size_t d = x.dim(1);
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attention: hidden size " + std::to_string(d) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  const Tensor q = add_rowwise(matmul(x, p.wq), p.bq);
  const Tensor k = add_rowwise(matmul(x, p.wk), p.bk);
  const Tensor v = add_rowwise(matmul(x, p.wv), p.bv);
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dh));
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = heads == 1 ? q : slice_cols(q, h * dh, (h + 1) * dh);
    const Tensor kh = heads == 1 ? k : slice_cols(k, h * dh, (h + 1) * dh);
    const Tensor vh = heads == 1 ? v : slice_cols(v, h * dh, (h + 1) * dh);
    const Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    const Tensor weights =
        key_keep.empty() ? softmax(scores) : masked_softmax(scores, key_keep);
    outs.push_back(matmul(weights, vh));
  }
  const Tensor merged = heads == 1 ? outs[0] : concat_cols(outs);
  return add_rowwise(matmul(merged, p.wo), p.bo);
}

Tensor attention_block(const Tensor& x, const TransformerLayerParams& p,
                       std::size_t heads, const std::vector<bool>& key_keep,
                       Real dropout_p, Rng* rng) {
  Tensor attn = multi_head_attention(x, p.attention, heads, key_keep);
  if (rng != nullptr && dropout_p > Real(0)) attn = dropout(attn, dropout_p, *rng);
  const Tensor h = layer_norm(add(x, attn), p.ln1_gamma, p.ln1_beta);
  Tensor ff = add_rowwise(
      matmul(relu(add_rowwise(matmul(h, p.ff1_w), p.ff1_b)), p.ff2_w), p.ff2_b);
  if (rng != nullptr && dropout_p > Real(0)) ff = dropout(ff, dropout_p, *rng);
  return layer_norm(add(h, ff), p.ln2_gamma, p.ln2_beta);
}

}  // namespace textdistill
