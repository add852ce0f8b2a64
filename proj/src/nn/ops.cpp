// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cslayout/slots.hpp"

namespace cslayout::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

void expect(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Parent i's grad buffer if it takes gradients, else nullptr.
std::vector<double>* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents.at(i);
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

}  // namespace

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  expect(x.shape().size() == 2 && w.shape().size() == 2 && b.shape().size() == 1,
         "linear: expected x[B,I], W[O,I], b[O]");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  expect(w.dim(1) == in && b.dim(0) == out, "linear: shape mismatch");
  std::vector<double> y(batch * out);
  MapMat Y(y.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(out));
  CMapMat X(x.value().data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(in));
  CMapMat W(w.value().data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  CMapVec B(b.value().data(), static_cast<Eigen::Index>(out));
  Y.noalias() = X * W.transpose();
  Y.rowwise() += B.transpose();
  return Tensor::make({batch, out}, std::move(y), {x, w, b}, [batch, in, out](Node& self) {
    const auto eb = static_cast<Eigen::Index>(batch), ei = static_cast<Eigen::Index>(in),
               eo = static_cast<Eigen::Index>(out);
    CMapMat dY(self.grad.data(), eb, eo);
    if (auto* gx = parent_grad(self, 0)) {
      CMapMat W(self.parents[1]->value.data(), eo, ei);
      MapMat(gx->data(), eb, ei).noalias() += dY * W;
    }
    if (auto* gw = parent_grad(self, 1)) {
      CMapMat X(self.parents[0]->value.data(), eb, ei);
      MapMat(gw->data(), eo, ei).noalias() += dY.transpose() * X;
    }
    if (auto* gb = parent_grad(self, 2)) {
      MapVec(gb->data(), eo) += dY.colwise().sum().transpose();
    }
  });
}

namespace {

struct ConvGeom {
  std::size_t c, h, w, o, k, stride, pad, ho, wo;
  std::size_t patch() const { return c * k * k; }
  std::size_t pixels() const { return ho * wo; }
};

// cols[patch, pixels] for one image.
void im2col(const double* x, const ConvGeom& g, double* cols) {
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        double* row = cols + ((ci * g.k + ky) * g.k + kx) * g.pixels();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) &&
                                ix < static_cast<std::ptrdiff_t>(g.w);
            row[oy * g.wo + ox] =
                inside ? x[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeom& g, double* dx) {
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const double* row = cols + ((ci * g.k + ky) * g.k + kx) * g.pixels();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dx[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] +=
                row[oy * g.wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
              std::size_t pad) {
  expect(x.shape().size() == 4 && w.shape().size() == 4 && b.shape().size() == 1,
         "conv2d: expected x[B,C,H,W], W[O,C,k,k], b[O]");
  expect(stride >= 1, "conv2d: stride must be positive");
  ConvGeom g{x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride, pad, 0, 0};
  expect(w.dim(1) == g.c && w.dim(3) == g.k && b.dim(0) == g.o, "conv2d: shape mismatch");
  expect(g.h + 2 * pad >= g.k && g.w + 2 * pad >= g.k, "conv2d: kernel larger than input");
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;
  const std::size_t batch = x.dim(0);
  const auto ep = static_cast<Eigen::Index>(g.patch()), en = static_cast<Eigen::Index>(g.pixels()),
             eo = static_cast<Eigen::Index>(g.o);

  auto cols = std::make_shared<std::vector<double>>(batch * g.patch() * g.pixels());
  std::vector<double> y(batch * g.o * g.pixels());
  CMapMat W(w.value().data(), eo, ep);
  CMapVec B(b.value().data(), eo);
  const std::size_t in_stride = g.c * g.h * g.w;
  for (std::size_t n = 0; n < batch; ++n) {
    double* cn = cols->data() + n * g.patch() * g.pixels();
    im2col(x.value().data() + n * in_stride, g, cn);
    MapMat Y(y.data() + n * g.o * g.pixels(), eo, en);
    Y.noalias() = W * CMapMat(cn, ep, en);
    Y.colwise() += B;
  }
  return Tensor::make({batch, g.o, g.ho, g.wo}, std::move(y), {x, w, b},
                      [g, batch, cols, ep, en, eo, in_stride](Node& self) {
                        auto* gx = parent_grad(self, 0);
                        auto* gw = parent_grad(self, 1);
                        auto* gb = parent_grad(self, 2);
                        CMapMat W(self.parents[1]->value.data(), eo, ep);
                        std::vector<double> dcols(gx ? g.patch() * g.pixels() : 0);
                        for (std::size_t n = 0; n < batch; ++n) {
                          CMapMat dY(self.grad.data() + n * g.o * g.pixels(), eo, en);
                          const double* cn = cols->data() + n * g.patch() * g.pixels();
                          if (gw) MapMat(gw->data(), eo, ep).noalias() += dY * CMapMat(cn, ep, en).transpose();
                          if (gb) MapVec(gb->data(), eo) += dY.rowwise().sum();
                          if (gx) {
                            MapMat(dcols.data(), ep, en).noalias() = W.transpose() * dY;
                            col2im_add(dcols.data(), g, gx->data() + n * in_stride);
                          }
                        }
                      });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  std::vector<double> y(x.value().begin(), x.value().end());
  for (auto& v : y) v = v > 0 ? v : slope * v;
  return Tensor::make(x.shape(), std::move(y), {x}, [slope](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const auto& xv = self.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (xv[i] > 0 ? 1.0 : slope);
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = cslayout::sigmoid(x.value()[i]);
  return Tensor::make(x.shape(), std::move(y), {x}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = self.value[i];
      g[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor exp(const Tensor& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(x.value()[i]);
  return Tensor::make(x.shape(), std::move(y), {x}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  expect(a.shape() == b.shape(), "add: shape mismatch");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
  return Tensor::make(a.shape(), std::move(y), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = parent_grad(self, p)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor scale(const Tensor& x, double s) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * x.value()[i];
  return Tensor::make(x.shape(), std::move(y), {x}, [s](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  expect(numel(shape) == x.size(), "reshape: element count mismatch");
  std::vector<double> y(x.value().begin(), x.value().end());
  return Tensor::make(std::move(shape), std::move(y), {x}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  expect(!parts.empty(), "concat_cols: no inputs");
  const std::size_t rows = parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    expect(p.shape().size() == 2 && p.dim(0) == rows, "concat_cols: expected [R,N] inputs with equal R");
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  std::vector<double> y(rows * total);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const double* src = parts[i].value().data() + r * widths[i];
      std::copy(src, src + widths[i], y.data() + r * total + off);
      off += widths[i];
    }
  }
  return Tensor::make({rows, total}, std::move(y), parts, [rows, total, widths](Node& self) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (auto* g = parent_grad(self, i)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < widths[i]; ++c) {
            (*g)[r * widths[i] + c] += self.grad[r * total + off + c];
          }
        }
      }
      off += widths[i];
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t len) {
  expect(x.shape().size() == 2 && start + len <= x.dim(1), "slice_cols: out of range");
  const std::size_t rows = x.dim(0), n = x.dim(1);
  std::vector<double> y(rows * len);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.value().data() + r * n + start, len, y.data() + r * len);
  }
  return Tensor::make({rows, len}, std::move(y), {x}, [rows, n, start, len](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < len; ++c) g[r * n + start + c] += self.grad[r * len + c];
    }
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  expect(x.shape().size() == 2, "gather_rows: expected [R,N]");
  const std::size_t n = x.dim(1);
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<double> y(idx.size() * n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    expect(idx[i] < x.dim(0), "gather_rows: row index out of range");
    std::copy_n(x.value().data() + idx[i] * n, n, y.data() + i * n);
  }
  const std::size_t count = idx.size();
  return Tensor::make({count, n}, std::move(y), {x}, [idx = std::move(idx), n](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t c = 0; c < n; ++c) g[idx[i] * n + c] += self.grad[i * n + c];
    }
  });
}

Tensor softmax_rows(const Tensor& x) {
  expect(x.shape().size() == 2, "softmax_rows: expected [R,N]");
  const std::size_t rows = x.dim(0), n = x.dim(1);
  std::vector<double> y(rows * n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.value().data() + r * n;
    double* out = y.data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) z += (out[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < n; ++c) out[c] /= z;
  }
  return Tensor::make({rows, n}, std::move(y), {x}, [rows, n](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* s = self.value.data() + r * n;
      const double* dy = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += s[c] * dy[c];
      for (std::size_t c = 0; c < n; ++c) g[r * n + c] += s[c] * (dy[c] - dot);
    }
  });
}

Tensor weighted_sum(const std::vector<Tensor>& parts, const std::vector<double>& weights) {
  expect(parts.size() == weights.size(), "weighted_sum: size mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) v += weights[i] * parts[i].item();
  return Tensor::make({}, {v}, parts, [weights](Node& self) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (auto* g = parent_grad(self, i)) (*g)[0] += weights[i] * self.grad[0];
    }
  });
}

Tensor sum(const Tensor& x) {
  double v = 0.0;
  for (double e : x.value()) v += e;
  return Tensor::make({}, {v}, {x}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (auto& e : g) e += self.grad[0];
  });
}

}  // namespace cslayout::nn
