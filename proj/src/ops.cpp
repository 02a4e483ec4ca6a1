// Copyright 2026 The wearseg Authors. All Rights Reserved.
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

#include "wearseg/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wearseg/parallel.hpp"

namespace wearseg::ops {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

// Bounds im2col scratch to roughly this many columns per GEMM.
constexpr std::size_t kChunkColumns = 1 << 15;

void require_rank4(const Shape& s, const char* what) {
  if (s.size() != 4)
    throw ConfigError(std::string(what) + " expects an N x C x H x W tensor, got " + shape_str(s));
}

template <typename T>
bool wants_grad(const typename BasicTensor<T>::Node& self, std::size_t i) {
  return self.parents[i]->requires_grad;
}

struct ConvGeometry {
  std::size_t ci, h, w, kh, kw, sh, sw, ph, pw, ho, wo;
  std::size_t k() const { return ci * kh * kw; }
};

template <typename T>
void im2col(const T* in, const ConvGeometry& g, std::size_t r0, std::size_t r1, T* cols) {
  const std::size_t pc = (r1 - r0) * g.wo;
  for (std::size_t c = 0; c < g.ci; ++c) {
    const T* plane = in + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        T* row = cols + ((c * g.kh + ky) * g.kw + kx) * pc;
        for (std::size_t oy = r0; oy < r1; ++oy) {
          T* dst = row + (oy - r0) * g.wo;
          const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.ph);
          if (iy < 0 || iy >= static_cast<long>(g.h)) {
            std::fill(dst, dst + g.wo, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const long ix = static_cast<long>(ox * g.sw + kx) - static_cast<long>(g.pw);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.w)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, std::size_t r0, std::size_t r1, T* out) {
  const std::size_t pc = (r1 - r0) * g.wo;
  for (std::size_t c = 0; c < g.ci; ++c) {
    T* plane = out + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const T* row = cols + ((c * g.kh + ky) * g.kw + kx) * pc;
        for (std::size_t oy = r0; oy < r1; ++oy) {
          const T* src = row + (oy - r0) * g.wo;
          const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.ph);
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const long ix = static_cast<long>(ox * g.sw + kx) - static_cast<long>(g.pw);
            if (ix >= 0 && ix < static_cast<long>(g.w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

/// Adds per-item partial sums into `total` in item order.
template <typename T>
void reduce_in_order(const std::vector<std::vector<T>>& partials, std::vector<T>& total) {
  for (const auto& p : partials)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
}

}  // namespace

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0)
    throw ConfigError("convolution channel counts must be positive");
  if (kernel[0] == 0 || kernel[1] == 0 || stride[0] == 0 || stride[1] == 0)
    throw ConfigError("convolution kernel and stride must be >= 1");
}

std::size_t ConvSpec::output_extent(std::size_t in, int axis) const {
  const std::size_t padded = in + 2 * padding[axis];
  if (padded < kernel[axis])
    throw ConfigError("input extent " + std::to_string(in) + " smaller than kernel " +
                      std::to_string(kernel[axis]) + " after padding");
  const std::size_t span = padded - kernel[axis];
  if (span % stride[axis] != 0)
    throw ConfigError("convolution output extent is not an integer: (" + std::to_string(in) +
                      " + 2*" + std::to_string(padding[axis]) + " - " +
                      std::to_string(kernel[axis]) + ") / " + std::to_string(stride[axis]));
  return span / stride[axis] + 1;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const BasicTensor<T>& weights, const BasicTensor<T>& bias) {
  spec.validate();
  require_rank4(input.shape(), "conv2d");
  if (input.dim(1) != spec.in_channels)
    throw ConfigError("conv2d input has " + std::to_string(input.dim(1)) +
                      " channels, spec expects " + std::to_string(spec.in_channels));
  if (weights.shape() != spec.weight_shape())
    throw ConfigError("conv2d weight shape " + shape_str(weights.shape()) + ", expected " +
                      shape_str(spec.weight_shape()));
  if (bias.shape() != Shape{spec.out_channels})
    throw ConfigError("conv2d bias shape " + shape_str(bias.shape()) + ", expected [" +
                      std::to_string(spec.out_channels) + "]");

  const std::size_t n = input.dim(0);
  const ConvGeometry g{spec.in_channels, input.dim(2), input.dim(3),
                       spec.kernel[0],   spec.kernel[1], spec.stride[0],
                       spec.stride[1],   spec.padding[0], spec.padding[1],
                       spec.output_extent(input.dim(2), 0), spec.output_extent(input.dim(3), 1)};
  const std::size_t co = spec.out_channels;
  const std::size_t p = g.ho * g.wo;
  const std::size_t rows_per_chunk = std::max<std::size_t>(1, kChunkColumns / g.wo);

  std::vector<T> out(n * co * p);
  const T* in = input.data().data();
  const ConstMatMap<T> wmat(weights.data().data(), co, g.k());
  const T* b = bias.data().data();

  parallel_for(n, [&](std::size_t item) {
    std::vector<T> cols;
    MatMap<T> omat(out.data() + item * co * p, co, p);
    for (std::size_t r0 = 0; r0 < g.ho; r0 += rows_per_chunk) {
      const std::size_t r1 = std::min(g.ho, r0 + rows_per_chunk);
      const std::size_t pc = (r1 - r0) * g.wo;
      cols.resize(g.k() * pc);
      im2col(in + item * g.ci * g.h * g.w, g, r0, r1, cols.data());
      omat.middleCols(r0 * g.wo, pc).noalias() = wmat * ConstMatMap<T>(cols.data(), g.k(), pc);
    }
    for (std::size_t c = 0; c < co; ++c) omat.row(static_cast<Eigen::Index>(c)).array() += b[c];
  });

  auto backward = [g, n, co, p, rows_per_chunk](typename BasicTensor<T>::Node& self) {
    auto& in_node = *self.parents[0];
    auto& w_node = *self.parents[1];
    auto& b_node = *self.parents[2];
    const bool need_in = in_node.requires_grad;
    const bool need_w = w_node.requires_grad;
    const bool need_b = b_node.requires_grad;
    const std::size_t wsize = co * g.k();
    const bool parallel = max_threads() > 1 && n > 1;

    std::vector<std::vector<T>> w_parts(parallel && need_w ? n : 1);
    std::vector<std::vector<T>> b_parts(need_b ? n : 0);
    std::vector<T>* in_grad = need_in ? &in_node.grad_buffer() : nullptr;
    std::vector<T>* w_grad = need_w ? &w_node.grad_buffer() : nullptr;
    const ConstMatMap<T> wmat(w_node.data.data(), co, g.k());

    parallel_for(n, [&](std::size_t item) {
      const ConstMatMap<T> dout(self.grad.data() + item * co * p, co, p);
      if (need_b) {
        auto& bp = b_parts[item];
        bp.assign(co, T(0));
        for (std::size_t c = 0; c < co; ++c) {
          const T* row = self.grad.data() + (item * co + c) * p;
          T s = 0;
          for (std::size_t i = 0; i < p; ++i) s += row[i];
          bp[c] = s;
        }
      }
      if (!need_in && !need_w) return;
      std::vector<T> cols, dcols;
      RowMatrix<T> tmp;
      std::vector<T>* wpart = nullptr;
      if (need_w) {
        wpart = &w_parts[parallel ? item : 0];
        wpart->assign(wsize, T(0));
      }
      const T* in = in_node.data.data() + item * g.ci * g.h * g.w;
      for (std::size_t r0 = 0; r0 < g.ho; r0 += rows_per_chunk) {
        const std::size_t r1 = std::min(g.ho, r0 + rows_per_chunk);
        const std::size_t pc = (r1 - r0) * g.wo;
        const auto dblock = dout.middleCols(r0 * g.wo, pc);
        if (need_w) {
          cols.resize(g.k() * pc);
          im2col(in, g, r0, r1, cols.data());
          tmp.noalias() = dblock * ConstMatMap<T>(cols.data(), g.k(), pc).transpose();
          MatMap<T>(wpart->data(), co, g.k()) += tmp;
        }
        if (need_in) {
          dcols.resize(g.k() * pc);
          MatMap<T>(dcols.data(), g.k(), pc).noalias() = wmat.transpose() * dblock;
          col2im_add(dcols.data(), g, r0, r1, in_grad->data() + item * g.ci * g.h * g.w);
        }
      }
      if (need_w && !parallel) {
        for (std::size_t i = 0; i < wsize; ++i) (*w_grad)[i] += (*wpart)[i];
      }
    });
    if (need_w && parallel) reduce_in_order(w_parts, *w_grad);
    if (need_b) reduce_in_order(b_parts, b_node.grad_buffer());
  };

  return BasicTensor<T>::from_op({n, co, g.ho, g.wo}, std::move(out), "conv2d",
                                 {input, weights, bias}, std::move(backward));
}

template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& input) {
  require_rank4(input.shape(), "maxpool2d");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h % 2 != 0 || w % 2 != 0)
    throw ConfigError("maxpool2d needs even spatial extents, got " + shape_str(input.shape()));
  const std::size_t ho = h / 2, wo = w / 2;
  std::vector<T> out(n * c * ho * wo);
  std::vector<std::uint32_t> argmax(out.size());
  const T* in = input.data().data();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        const std::size_t base = plane * h * w + 2 * oy * w + 2 * ox;
        const std::size_t window[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = window[0];
        for (int k = 1; k < 4; ++k)
          if (in[window[k]] > in[best]) best = window[k];
        const std::size_t o = (plane * ho + oy) * wo + ox;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  auto backward = [argmax](typename BasicTensor<T>::Node& self) {
    auto& dst = self.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < argmax.size(); ++o) dst[argmax[o]] += self.grad[o];
  };
  auto result = BasicTensor<T>::from_op({n, c, ho, wo}, std::move(out), "maxpool2d", {input},
                                        std::move(backward));
  return {std::move(result), std::move(argmax)};
}

template <typename T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& bias) {
  require_rank4(input.shape(), "transposed_conv2d");
  const std::size_t n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (weights.rank() != 4 || weights.dim(0) != ci || weights.dim(2) != 2 || weights.dim(3) != 2)
    throw ConfigError("transposed_conv2d weight shape " + shape_str(weights.shape()) +
                      ", expected [" + std::to_string(ci) + ",Co,2,2]");
  const std::size_t co = weights.dim(1);
  if (bias.shape() != Shape{co})
    throw ConfigError("transposed_conv2d bias shape " + shape_str(bias.shape()) + ", expected [" +
                      std::to_string(co) + "]");
  const std::size_t hw = h * w, ho = 2 * h, wo = 2 * w;
  const std::size_t c4 = co * 4;

  std::vector<T> out(n * co * ho * wo);
  const ConstMatMap<T> wmat(weights.data().data(), ci, c4);
  const T* b = bias.data().data();
  parallel_for(n, [&](std::size_t item) {
    RowMatrix<T> cols = wmat.transpose() * ConstMatMap<T>(input.data().data() + item * ci * hw, ci, hw);
    T* dst = out.data() + item * co * ho * wo;
    for (std::size_t c = 0; c < co; ++c)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t bb = 0; bb < 2; ++bb) {
          const T* src = cols.data() + (c * 4 + a * 2 + bb) * hw;
          for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
              dst[(c * ho + 2 * y + a) * wo + 2 * x + bb] = src[y * w + x] + b[c];
        }
  });

  auto backward = [n, ci, co, h, w, hw, ho, wo, c4](typename BasicTensor<T>::Node& self) {
    auto& in_node = *self.parents[0];
    auto& w_node = *self.parents[1];
    auto& b_node = *self.parents[2];
    const bool need_in = in_node.requires_grad, need_w = w_node.requires_grad,
               need_b = b_node.requires_grad;
    const bool parallel = max_threads() > 1 && n > 1;
    std::vector<std::vector<T>> w_parts(need_w ? (parallel ? n : 1) : 0);
    std::vector<std::vector<T>> b_parts(need_b ? n : 0);
    std::vector<T>* in_grad = need_in ? &in_node.grad_buffer() : nullptr;
    std::vector<T>* w_grad = need_w ? &w_node.grad_buffer() : nullptr;
    const ConstMatMap<T> wmat(w_node.data.data(), ci, c4);

    parallel_for(n, [&](std::size_t item) {
      const T* g = self.grad.data() + item * co * ho * wo;
      RowMatrix<T> dcols(c4, hw);
      for (std::size_t c = 0; c < co; ++c)
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t bb = 0; bb < 2; ++bb) {
            T* d = dcols.data() + (c * 4 + a * 2 + bb) * hw;
            for (std::size_t y = 0; y < h; ++y)
              for (std::size_t x = 0; x < w; ++x) d[y * w + x] = g[(c * ho + 2 * y + a) * wo + 2 * x + bb];
          }
      if (need_b) {
        auto& bp = b_parts[item];
        bp.assign(co, T(0));
        for (std::size_t c = 0; c < co; ++c) {
          const T* plane = g + c * ho * wo;
          T s = 0;
          for (std::size_t i = 0; i < ho * wo; ++i) s += plane[i];
          bp[c] = s;
        }
      }
      if (need_in) {
        MatMap<T>(in_grad->data() + item * ci * hw, ci, hw) += wmat * dcols;
      }
      if (need_w) {
        auto& wp = w_parts[parallel ? item : 0];
        wp.resize(ci * c4);
        MatMap<T>(wp.data(), ci, c4).noalias() =
            ConstMatMap<T>(in_node.data.data() + item * ci * hw, ci, hw) * dcols.transpose();
        if (!parallel)
          for (std::size_t i = 0; i < wp.size(); ++i) (*w_grad)[i] += wp[i];
      }
    });
    if (need_w && parallel) reduce_in_order(w_parts, *w_grad);
    if (need_b) reduce_in_order(b_parts, b_node.grad_buffer());
  };

  return BasicTensor<T>::from_op({n, co, ho, wo}, std::move(out), "transposed_conv2d",
                                 {input, weights, bias}, std::move(backward));
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  std::vector<T> out(input.data().begin(), input.data().end());
  for (auto& v : out) v = v > T(0) ? v : T(0);
  auto backward = [](typename BasicTensor<T>::Node& self) {
    auto& src = *self.parents[0];
    auto& dst = src.grad_buffer();
    for (std::size_t i = 0; i < dst.size(); ++i)
      if (src.data[i] > T(0)) dst[i] += self.grad[i];
  };
  return BasicTensor<T>::from_op(input.shape(), std::move(out), "relu", {input},
                                 std::move(backward));
}

template <typename T>
BasicTensor<T> softmax_channels(const BasicTensor<T>& input) {
  require_rank4(input.shape(), "softmax_channels");
  const std::size_t n = input.dim(0), k = input.dim(1), p = input.dim(2) * input.dim(3);
  const T* in = input.data().data();
  std::vector<T> out(input.numel());
  for (std::size_t item = 0; item < n; ++item) {
    const std::size_t base = item * k * p;
    for (std::size_t px = 0; px < p; ++px) {
      T mx = in[base + px];
      for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, in[base + c * p + px]);
      T sum = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const T e = std::exp(in[base + c * p + px] - mx);
        out[base + c * p + px] = e;
        sum += e;
      }
      for (std::size_t c = 0; c < k; ++c) out[base + c * p + px] /= sum;
    }
  }
  auto backward = [n, k, p](typename BasicTensor<T>::Node& self) {
    auto& dst = self.parents[0]->grad_buffer();
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t item = 0; item < n; ++item) {
      const std::size_t base = item * k * p;
      for (std::size_t px = 0; px < p; ++px) {
        T dot = 0;
        for (std::size_t c = 0; c < k; ++c) dot += g[base + c * p + px] * y[base + c * p + px];
        for (std::size_t c = 0; c < k; ++c) {
          const std::size_t i = base + c * p + px;
          dst[i] += y[i] * (g[i] - dot);
        }
      }
    }
  };
  return BasicTensor<T>::from_op(input.shape(), std::move(out), "softmax_channels", {input},
                                 std::move(backward));
}

template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& input, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0) || rate >= 1.0)
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return input;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(input.numel());
  for (auto& m : mask) m = rng.uniform() < rate ? T(0) : scale;
  std::vector<T> out(input.data().begin(), input.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  auto backward = [mask = std::move(mask)](typename BasicTensor<T>::Node& self) {
    auto& dst = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i] * mask[i];
  };
  return BasicTensor<T>::from_op(input.shape(), std::move(out), "dropout", {input},
                                 std::move(backward));
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank4(a.shape(), "concat_channels");
  require_rank4(b.shape(), "concat_channels");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw ConfigError("concat_channels shape mismatch " + shape_str(a.shape()) + " vs " +
                      shape_str(b.shape()));
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), p = a.dim(2) * a.dim(3);
  std::vector<T> out(n * (ca + cb) * p);
  for (std::size_t item = 0; item < n; ++item) {
    std::copy_n(a.data().data() + item * ca * p, ca * p, out.data() + item * (ca + cb) * p);
    std::copy_n(b.data().data() + item * cb * p, cb * p, out.data() + (item * (ca + cb) + ca) * p);
  }
  auto backward = [n, ca, cb, p](typename BasicTensor<T>::Node& self) {
    for (int side = 0; side < 2; ++side) {
      auto& parent = *self.parents[side];
      if (!parent.requires_grad) continue;
      auto& dst = parent.grad_buffer();
      const std::size_t c = side == 0 ? ca : cb;
      const std::size_t offset = side == 0 ? 0 : ca;
      for (std::size_t item = 0; item < n; ++item) {
        const T* src = self.grad.data() + (item * (ca + cb) + offset) * p;
        T* d = dst.data() + item * c * p;
        for (std::size_t i = 0; i < c * p; ++i) d[i] += src[i];
      }
    }
  };
  return BasicTensor<T>::from_op({n, ca + cb, a.dim(2), a.dim(3)}, std::move(out),
                                 "concat_channels", {a, b}, std::move(backward));
}

template <typename T>
BasicTensor<T> weighted_sum(const BasicTensor<T>& x, std::span<const T> coeffs) {
  if (coeffs.size() != x.numel())
    throw ConfigError("weighted_sum coefficient count does not match tensor size");
  T s = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += x[i] * coeffs[i];
  std::vector<T> c(coeffs.begin(), coeffs.end());
  auto backward = [c = std::move(c)](typename BasicTensor<T>::Node& self) {
    auto& dst = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[0] * c[i];
  };
  return BasicTensor<T>::from_op({1}, {s}, "weighted_sum", {x}, std::move(backward));
}

namespace {

struct LossGeometry {
  std::size_t n, k, p;
};

template <typename T>
LossGeometry check_loss_inputs(const BasicTensor<T>& scores, std::span<const std::uint8_t> target,
                               const BasicTensor<T>& weights, const char* what) {
  require_rank4(scores.shape(), what);
  const LossGeometry geo{scores.dim(0), scores.dim(1), scores.dim(2) * scores.dim(3)};
  if (target.size() != geo.n * geo.p)
    throw DataError(std::string(what) + ": target has " + std::to_string(target.size()) +
                    " labels, expected " + std::to_string(geo.n * geo.p));
  if (weights.shape() != Shape{scores.dim(0), scores.dim(2), scores.dim(3)})
    throw ConfigError(std::string(what) + ": pixel weight shape " + shape_str(weights.shape()) +
                      " does not match N x H x W of " + shape_str(scores.shape()));
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] >= geo.k)
      throw DataError(std::string(what) + ": target class " + std::to_string(target[i]) +
                      " at pixel " + std::to_string(i) + " >= class count " +
                      std::to_string(geo.k));
  return geo;
}

// Reductions over pixels run in double regardless of T.
template <typename T>
double weight_total(const BasicTensor<T>& weights) {
  double total = 0;
  for (auto w : weights.data()) {
    if (w < T(0)) throw DataError("pixel weights must be non-negative");
    total += static_cast<double>(w);
  }
  if (!(total > 0.0)) throw DataError("pixel weights sum to zero");
  return total;
}

}  // namespace

template <typename T>
BasicTensor<T> weighted_cross_entropy(const BasicTensor<T>& probs,
                                      std::span<const std::uint8_t> target,
                                      const BasicTensor<T>& pixel_weights) {
  const auto geo = check_loss_inputs(probs, target, pixel_weights, "weighted_cross_entropy");
  const double total = weight_total(pixel_weights);
  const T floor = static_cast<T>(kLogClamp);
  const T* pr = probs.data().data();
  const T* w = pixel_weights.data().data();
  double acc = 0;
  for (std::size_t item = 0; item < geo.n; ++item)
    for (std::size_t px = 0; px < geo.p; ++px) {
      const std::size_t pix = item * geo.p + px;
      const T pt = pr[(item * geo.k + target[pix]) * geo.p + px];
      acc += static_cast<double>(w[pix]) * std::log(static_cast<double>(std::max(pt, floor)));
    }
  std::vector<std::uint8_t> labels(target.begin(), target.end());
  auto backward = [geo, total, floor, labels = std::move(labels)](typename BasicTensor<T>::Node& self) {
    auto& pnode = *self.parents[0];
    if (!pnode.requires_grad) return;
    auto& dst = pnode.grad_buffer();
    const auto& wdata = self.parents[1]->data;
    const T scale = static_cast<T>(static_cast<double>(self.grad[0]) / total);
    for (std::size_t item = 0; item < geo.n; ++item)
      for (std::size_t px = 0; px < geo.p; ++px) {
        const std::size_t pix = item * geo.p + px;
        const std::size_t i = (item * geo.k + labels[pix]) * geo.p + px;
        const T pt = pnode.data[i];
        if (pt > floor) dst[i] -= scale * wdata[pix] / pt;
      }
  };
  return BasicTensor<T>::from_op({1}, {static_cast<T>(-acc / total)}, "weighted_cross_entropy",
                                 {probs, pixel_weights}, std::move(backward));
}

template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                     std::span<const std::uint8_t> target,
                                     const BasicTensor<T>& pixel_weights) {
  const auto geo = check_loss_inputs(logits, target, pixel_weights, "softmax_cross_entropy");
  const double total = weight_total(pixel_weights);
  const T log_floor = static_cast<T>(std::log(kLogClamp));
  const T* z = logits.data().data();
  const T* w = pixel_weights.data().data();

  // Softmax probabilities are kept for backward; clamped pixels get zero
  // gradient, matching the derivative of the clamped log.
  std::vector<T> probs(logits.numel());
  std::vector<std::uint8_t> clamped(geo.n * geo.p, 0);
  double acc = 0;
  for (std::size_t item = 0; item < geo.n; ++item) {
    const std::size_t base = item * geo.k * geo.p;
    for (std::size_t px = 0; px < geo.p; ++px) {
      const std::size_t pix = item * geo.p + px;
      T mx = z[base + px];
      for (std::size_t c = 1; c < geo.k; ++c) mx = std::max(mx, z[base + c * geo.p + px]);
      T sum = 0;
      for (std::size_t c = 0; c < geo.k; ++c) {
        const T e = std::exp(z[base + c * geo.p + px] - mx);
        probs[base + c * geo.p + px] = e;
        sum += e;
      }
      for (std::size_t c = 0; c < geo.k; ++c) probs[base + c * geo.p + px] /= sum;
      T log_pt = z[base + target[pix] * geo.p + px] - mx - std::log(sum);
      if (log_pt < log_floor) {
        log_pt = log_floor;
        clamped[pix] = 1;
      }
      acc += static_cast<double>(w[pix]) * static_cast<double>(log_pt);
    }
  }
  std::vector<std::uint8_t> labels(target.begin(), target.end());
  auto backward = [geo, total, probs = std::move(probs), clamped = std::move(clamped),
                   labels = std::move(labels)](typename BasicTensor<T>::Node& self) {
    auto& znode = *self.parents[0];
    if (!znode.requires_grad) return;
    auto& dst = znode.grad_buffer();
    const auto& wdata = self.parents[1]->data;
    const T scale = static_cast<T>(static_cast<double>(self.grad[0]) / total);
    for (std::size_t item = 0; item < geo.n; ++item) {
      const std::size_t base = item * geo.k * geo.p;
      for (std::size_t px = 0; px < geo.p; ++px) {
        const std::size_t pix = item * geo.p + px;
        if (clamped[pix]) continue;
        const T s = scale * wdata[pix];
        for (std::size_t c = 0; c < geo.k; ++c) {
          const std::size_t i = base + c * geo.p + px;
          dst[i] += s * (probs[i] - (c == labels[pix] ? T(1) : T(0)));
        }
      }
    }
  };
  return BasicTensor<T>::from_op({1}, {static_cast<T>(-acc / total)}, "softmax_cross_entropy",
                                 {logits, pixel_weights}, std::move(backward));
}

#define WEARSEG_INSTANTIATE_OPS(T)                                                              \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const ConvSpec&, const BasicTensor<T>&, \
                                 const BasicTensor<T>&);                                        \
  template PoolResult<T> maxpool2d(const BasicTensor<T>&);                                      \
  template BasicTensor<T> transposed_conv2d(const BasicTensor<T>&, const BasicTensor<T>&,      \
                                            const BasicTensor<T>&);                             \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                          \
  template BasicTensor<T> softmax_channels(const BasicTensor<T>&);                              \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, Rng&, bool);                   \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);        \
  template BasicTensor<T> weighted_sum(const BasicTensor<T>&, std::span<const T>);              \
  template BasicTensor<T> weighted_cross_entropy(const BasicTensor<T>&,                         \
                                                 std::span<const std::uint8_t>,                 \
                                                 const BasicTensor<T>&);                        \
  template BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>&,                          \
                                                std::span<const std::uint8_t>,                  \
                                                const BasicTensor<T>&);

WEARSEG_INSTANTIATE_OPS(float)
WEARSEG_INSTANTIATE_OPS(double)

}  // namespace wearseg::ops
