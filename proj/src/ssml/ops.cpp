/*
 * Copyright 2026 The SSML Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ssml/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ssml/error.hpp"

namespace ssml::diff {
namespace {

using BackwardFn = std::function<void(Node&)>;

Tensor MakeResult(const char* op, Shape shape, std::vector<double> value,
                  std::vector<Tensor> parents, BackwardFn backward) {
  for (double v : value) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNumeric, op, " produced a non-finite value");
  }
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->is_leaf = false;
  if (GradEnabled()) {
    for (const Tensor& p : parents) {
      if (p.defined() && p.requires_grad()) node->requires_grad = true;
    }
  }
  if (node->requires_grad) {
    for (Tensor& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor::Wrap(std::move(node));
}

// Gradient buffer of parent `i`, or nullptr when it does not need one.
double* GradOf(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  if (p == nullptr || !p->requires_grad) return nullptr;
  return p->grad.data();
}

const std::vector<double>& ValueOf(Node& self, std::size_t i) {
  return self.parents[i]->value;
}

void RequireSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    Fail(ErrorCode::kInvalidShape, op, ": shape mismatch ", ShapeString(a.shape()),
         " vs ", ShapeString(b.shape()));
  }
}

void RequireRank(const char* op, const Tensor& x, std::size_t rank) {
  if (x.rank() != rank) {
    Fail(ErrorCode::kInvalidShape, op, ": expected rank ", rank, ", got shape ",
         ShapeString(x.shape()));
  }
}

// Rows/columns view of the last axis.
std::pair<std::size_t, std::size_t> RowsCols(const char* op, const Tensor& x) {
  if (x.rank() == 0) Fail(ErrorCode::kInvalidShape, op, ": scalar input");
  const std::size_t cols = x.shape().back();
  return {x.size() / cols, cols};
}

template <typename F, typename G>
Tensor Unary(const char* op, const Tensor& x, F forward, G derivative) {
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  return MakeResult(op, x.shape(), std::move(out), {x},
                    [derivative](Node& self) {
                      double* gx = GradOf(self, 0);
                      if (gx == nullptr) return;
                      const auto& xv = ValueOf(self, 0);
                      for (std::size_t i = 0; i < xv.size(); ++i) {
                        gx[i] += self.grad[i] * derivative(xv[i], self.value[i]);
                      }
                    });
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return MakeResult("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* g = GradOf(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return MakeResult("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = GradOf(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return MakeResult("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = ValueOf(self, 0);
    const auto& bv = ValueOf(self, 1);
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (double* g = GradOf(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor Scale(const Tensor& x, double factor) {
  return Unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor AddScalar(const Tensor& x, double offset) {
  return Unary(
      "add_scalar", x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

Tensor Neg(const Tensor& x) { return Scale(x, -1.0); }

Tensor Relu(const Tensor& x) {
  return Unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor Exp(const Tensor& x) {
  return Unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor Log(const Tensor& x) {
  return Unary(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor Clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) Fail(ErrorCode::kInvalidInput, "clamp: lo > hi");
  return Unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor SumLast(const Tensor& x) {
  const auto [rows, cols] = RowsCols("sum_last", x);
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  std::vector<double> out(rows, 0.0);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += in[r * cols + c];
    out[r] = acc;
  }
  return MakeResult("sum_last", std::move(shape), std::move(out), {x},
                    [rows, cols](Node& self) {
                      double* g = GradOf(self, 0);
                      if (g == nullptr) return;
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += self.grad[r];
                      }
                    });
}

Tensor MeanLast(const Tensor& x) {
  const auto cols = RowsCols("mean_last", x).second;
  return Scale(SumLast(x), 1.0 / static_cast<double>(cols));
}

Tensor SumAll(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return MakeResult("sum_all", {}, {acc}, {x}, [](Node& self) {
    double* g = GradOf(self, 0);
    if (g == nullptr) return;
    const std::size_t n = ValueOf(self, 0).size();
    for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
  });
}

Tensor MeanAll(const Tensor& x) {
  return Scale(SumAll(x), 1.0 / static_cast<double>(x.size()));
}

Tensor Softmax(const Tensor& x) {
  const auto [rows, cols] = RowsCols("softmax", x);
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * cols;
    double* dst = out.data() + r * cols;
    const double m = *std::max_element(row, row + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dst[c] = std::exp(row[c] - m);
      total += dst[c];
    }
    for (std::size_t c = 0; c < cols; ++c) dst[c] /= total;
  }
  return MakeResult("softmax", x.shape(), std::move(out), {x},
                    [rows, cols](Node& self) {
                      double* g = GradOf(self, 0);
                      if (g == nullptr) return;
                      for (std::size_t r = 0; r < rows; ++r) {
                        const double* y = self.value.data() + r * cols;
                        const double* gy = self.grad.data() + r * cols;
                        double dot = 0.0;
                        for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * y[c];
                        for (std::size_t c = 0; c < cols; ++c) {
                          g[r * cols + c] += y[c] * (gy[c] - dot);
                        }
                      }
                    });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  const auto [rows, cols] = RowsCols("layer_norm", x);
  if (gain.shape() != Shape{cols} || bias.shape() != Shape{cols}) {
    Fail(ErrorCode::kInvalidShape, "layer_norm: gain/bias must be [", cols, "]");
  }
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(x.size());
  const auto in = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += row[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      xhat[i] = (row[c] - mean) * inv_std[r];
      out[i] = gv[c] * xhat[i] + bv[c];
    }
  }
  return MakeResult(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [rows, cols, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const auto& gv = ValueOf(self, 1);
        double* gx = GradOf(self, 0);
        double* gg = GradOf(self, 1);
        double* gb = GradOf(self, 2);
        const double n = static_cast<double>(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gy = self.grad.data() + r * cols;
          const double* xh = xhat.data() + r * cols;
          if (gg != nullptr) {
            for (std::size_t c = 0; c < cols; ++c) gg[c] += gy[c] * xh[c];
          }
          if (gb != nullptr) {
            for (std::size_t c = 0; c < cols; ++c) gb[c] += gy[c];
          }
          if (gx != nullptr) {
            double sum_d = 0.0;
            double sum_dx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = gy[c] * gv[c];
              sum_d += d;
              sum_dx += d * xh[c];
            }
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = gy[c] * gv[c];
              gx[r * cols + c] += inv_std[r] * (n * d - sum_d - xh[c] * sum_dx) / n;
            }
          }
        }
      });
}

Tensor L2Normalize(const Tensor& x, double eps) {
  const auto [rows, cols] = RowsCols("l2_normalize", x);
  std::vector<double> norms(rows);
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < cols; ++c) ss += in[r * cols + c] * in[r * cols + c];
    norms[r] = std::sqrt(ss + eps);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = in[r * cols + c] / norms[r];
  }
  return MakeResult("l2_normalize", x.shape(), std::move(out), {x},
                    [rows, cols, norms = std::move(norms)](Node& self) {
                      double* g = GradOf(self, 0);
                      if (g == nullptr) return;
                      const auto& xv = ValueOf(self, 0);
                      for (std::size_t r = 0; r < rows; ++r) {
                        const double* gy = self.grad.data() + r * cols;
                        const double* xr = xv.data() + r * cols;
                        double dot = 0.0;
                        for (std::size_t c = 0; c < cols; ++c) dot += gy[c] * xr[c];
                        const double n = norms[r];
                        const double n3 = n * n * n;
                        for (std::size_t c = 0; c < cols; ++c) {
                          g[r * cols + c] += gy[c] / n - xr[c] * dot / n3;
                        }
                      }
                    });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank("matmul", a, 2);
  RequireRank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    Fail(ErrorCode::kInvalidShape, "matmul: ", ShapeString(a.shape()), " x ",
         ShapeString(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      const double* brow = bv.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  return MakeResult("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& av = ValueOf(self, 0);
    const auto& bv = ValueOf(self, 1);
    const double* gy = self.grad.data();
    if (double* ga = GradOf(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += gy[i * n + j] * bv[p * n + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (double* gb = GradOf(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double s = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += s * gy[i * n + j];
        }
      }
    }
  });
}

Tensor Transpose(const Tensor& x) {
  RequireRank("transpose", x, 2);
  const std::size_t r = x.dim(0), c = x.dim(1);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x.data()[i * c + j];
  }
  return MakeResult("transpose", {c, r}, std::move(out), {x}, [r, c](Node& self) {
    double* g = GradOf(self, 0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
    }
  });
}

Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  RequireRank("linear", x, 2);
  RequireRank("linear", weight, 2);
  const std::size_t n = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in) {
    Fail(ErrorCode::kInvalidShape, "linear: input ", ShapeString(x.shape()),
         " vs weight ", ShapeString(weight.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{out_dim}) {
    Fail(ErrorCode::kInvalidShape, "linear: bias must be [", out_dim, "]");
  }
  std::vector<double> out(n * out_dim);
  const auto xv = x.data();
  const auto wv = weight.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = has_bias ? bias.data()[o] : 0.0;
      for (std::size_t p = 0; p < in; ++p) acc += xv[i * in + p] * wv[o * in + p];
      out[i * out_dim + o] = acc;
    }
  }
  std::vector<Tensor> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return MakeResult(
      "linear", {n, out_dim}, std::move(out), std::move(parents),
      [n, in, out_dim, has_bias](Node& self) {
        const auto& xv = ValueOf(self, 0);
        const auto& wv = ValueOf(self, 1);
        const double* gy = self.grad.data();
        if (double* gx = GradOf(self, 0)) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double s = gy[i * out_dim + o];
              for (std::size_t p = 0; p < in; ++p) gx[i * in + p] += s * wv[o * in + p];
            }
          }
        }
        if (double* gw = GradOf(self, 1)) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double s = gy[i * out_dim + o];
              for (std::size_t p = 0; p < in; ++p) gw[o * in + p] += s * xv[i * in + p];
            }
          }
        }
        if (has_bias) {
          if (double* gb = GradOf(self, 2)) {
            for (std::size_t i = 0; i < n; ++i) {
              for (std::size_t o = 0; o < out_dim; ++o) gb[o] += gy[i * out_dim + o];
            }
          }
        }
      });
}

namespace {

// Output positions t in [lo, hi) for which t*stride + k - padding is inside
// [0, length).
std::pair<std::size_t, std::size_t> ValidRange(std::size_t k, std::size_t stride,
                                               std::size_t padding, std::size_t length,
                                               std::size_t out_len) {
  // Need t*stride >= padding - k.
  std::size_t lo = 0;
  if (padding > k) lo = (padding - k + stride - 1) / stride;
  // Need t*stride + k - padding <= length - 1.
  const long long top = static_cast<long long>(length) - 1 + static_cast<long long>(padding) -
                        static_cast<long long>(k);
  if (top < 0) return {0, 0};
  std::size_t hi = static_cast<std::size_t>(top) / stride + 1;
  hi = std::min(hi, out_len);
  if (lo > hi) lo = hi;
  return {lo, hi};
}

}  // namespace

Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
  RequireRank("conv1d", x, 3);
  RequireRank("conv1d", weight, 3);
  if (stride == 0) Fail(ErrorCode::kInvalidInput, "conv1d: stride must be positive");
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = weight.dim(0), kw = weight.dim(2);
  if (weight.dim(1) != cin) {
    Fail(ErrorCode::kInvalidShape, "conv1d: input ", ShapeString(x.shape()),
         " vs weight ", ShapeString(weight.shape()));
  }
  if (len + 2 * padding < kw) {
    Fail(ErrorCode::kInvalidShape, "conv1d: input length ", len, " shorter than kernel ", kw);
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{cout}) {
    Fail(ErrorCode::kInvalidShape, "conv1d: bias must be [", cout, "]");
  }
  const std::size_t out_len = (len + 2 * padding - kw) / stride + 1;
  std::vector<double> out(batch * cout * out_len, 0.0);
  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* orow = out.data() + (b * cout + co) * out_len;
      if (has_bias) std::fill(orow, orow + out_len, bias.data()[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xrow = xv + (b * cin + ci) * len;
        for (std::size_t k = 0; k < kw; ++k) {
          const double w = wv[(co * cin + ci) * kw + k];
          const auto [lo, hi] = ValidRange(k, stride, padding, len, out_len);
          if (lo == hi) continue;
          const double* src = xrow + (lo * stride + k - padding);
          double* dst = orow + lo;
          const std::size_t count = hi - lo;
          if (stride == 1) {
            for (std::size_t j = 0; j < count; ++j) dst[j] += w * src[j];
          } else {
            for (std::size_t j = 0; j < count; ++j) dst[j] += w * src[j * stride];
          }
        }
      }
    }
  }
  std::vector<Tensor> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return MakeResult(
      "conv1d", {batch, cout, out_len}, std::move(out), std::move(parents),
      [=](Node& self) {
        const double* xv = ValueOf(self, 0).data();
        const double* wv = ValueOf(self, 1).data();
        const double* gy = self.grad.data();
        double* gx = GradOf(self, 0);
        double* gw = GradOf(self, 1);
        double* gb = has_bias ? GradOf(self, 2) : nullptr;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* grow = gy + (b * cout + co) * out_len;
            if (gb != nullptr) {
              double acc = 0.0;
              for (std::size_t t = 0; t < out_len; ++t) acc += grow[t];
              gb[co] += acc;
            }
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const std::size_t xoff = (b * cin + ci) * len;
              for (std::size_t k = 0; k < kw; ++k) {
                const std::size_t widx = (co * cin + ci) * kw + k;
                const auto [lo, hi] = ValidRange(k, stride, padding, len, out_len);
                if (lo == hi) continue;
                const std::size_t first = xoff + lo * stride + k - padding;
                const std::size_t count = hi - lo;
                const double* gsrc = grow + lo;
                if (gw != nullptr) {
                  const double* src = xv + first;
                  double acc = 0.0;
                  for (std::size_t j = 0; j < count; ++j) acc += gsrc[j] * src[j * stride];
                  gw[widx] += acc;
                }
                if (gx != nullptr) {
                  const double w = wv[widx];
                  double* dst = gx + first;
                  for (std::size_t j = 0; j < count; ++j) dst[j * stride] += w * gsrc[j];
                }
              }
            }
          }
        }
      });
}

Tensor MaxPool1d(const Tensor& x, std::size_t kernel) {
  RequireRank("max_pool1d", x, 3);
  if (kernel == 0) Fail(ErrorCode::kInvalidInput, "max_pool1d: kernel must be positive");
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  const std::size_t out_len = len / kernel;
  if (out_len == 0) {
    Fail(ErrorCode::kInvalidShape, "max_pool1d: length ", len, " shorter than kernel ", kernel);
  }
  std::vector<double> out(rows * out_len);
  std::vector<std::size_t> argmax(rows * out_len);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < out_len; ++t) {
      std::size_t best = r * len + t * kernel;
      for (std::size_t j = 1; j < kernel; ++j) {
        const std::size_t i = r * len + t * kernel + j;
        if (in[i] > in[best]) best = i;
      }
      out[r * out_len + t] = in[best];
      argmax[r * out_len + t] = best;
    }
  }
  return MakeResult("max_pool1d", {x.dim(0), x.dim(1), out_len}, std::move(out), {x},
                    [argmax = std::move(argmax)](Node& self) {
                      double* g = GradOf(self, 0);
                      if (g == nullptr) return;
                      for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
                    });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.size()) {
    Fail(ErrorCode::kInvalidShape, "reshape: ", ShapeString(x.shape()), " -> ",
         ShapeString(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return MakeResult("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    double* g = GradOf(self, 0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

}  // namespace ssml::diff
