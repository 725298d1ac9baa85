#include "cscore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cscore/errors.hpp"

namespace cscore {
namespace {

void require_finite(std::span<const float> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValidationError(std::string(what) + ": non-finite value at flat index " +
                            std::to_string(i));
    }
  }
}

}  // namespace

Tensor2D::Tensor2D(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width, 0.0f) {}

Tensor2D::Tensor2D(std::size_t height, std::size_t width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_) {
    throw ValidationError("Tensor2D: data length " + std::to_string(data_.size()) +
                          " does not match shape " + std::to_string(height_) + "x" +
                          std::to_string(width_));
  }
  require_finite(data_, "Tensor2D");
}

Tensor2D Tensor2D::filled(std::size_t height, std::size_t width, float value) {
  return Tensor2D(height, width, std::vector<float>(height * width, value));
}

Tensor3D::Tensor3D(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels),
      data_(height * width * channels, 0.0f) {}

Tensor3D::Tensor3D(std::size_t height, std::size_t width, std::size_t channels,
                   std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * channels_) {
    throw ValidationError("Tensor3D: data length " + std::to_string(data_.size()) +
                          " does not match shape " + std::to_string(height_) + "x" +
                          std::to_string(width_) + "x" + std::to_string(channels_));
  }
  require_finite(data_, "Tensor3D");
}

Tensor2D Tensor3D::channel(std::size_t k) const {
  Tensor2D out(height_, width_);
  auto dst = out.values();
  for (std::size_t p = 0; p < spatial_size(); ++p) dst[p] = data_[p * channels_ + k];
  return out;
}

namespace {

template <typename T>
Heatmap normalize_impl(std::span<const T> src, std::size_t height, std::size_t width) {
  Heatmap h{Tensor2D(height, width), false};
  if (src.empty()) {
    h.degenerate = true;
    return h;
  }
  const auto [lo_it, hi_it] = std::minmax_element(src.begin(), src.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) {
    h.degenerate = true;
    return h;
  }
  const double range = hi - lo;
  auto dst = h.map.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>((static_cast<double>(src[i]) - lo) / range);
  }
  return h;
}

}  // namespace

Heatmap minmax_normalize(const Tensor2D& t) {
  return normalize_impl(t.values(), t.height(), t.width());
}

Heatmap minmax_normalize(std::span<const double> values, std::size_t height, std::size_t width) {
  if (values.size() != height * width) {
    throw ValidationError("minmax_normalize: buffer length does not match shape");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("minmax_normalize: non-finite value");
  }
  return normalize_impl(values, height, width);
}

Heatmap power_emphasis(const Heatmap& h, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("power_emphasis: alpha must be a finite value > 0, got " +
                         std::to_string(alpha));
  }
  Heatmap out{Tensor2D(h.height(), h.width()), h.degenerate};
  const auto src = h.map.values();
  auto dst = out.map.values();
  if (alpha == 1.0) {
    std::copy(src.begin(), src.end(), dst.begin());
    return out;
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(std::pow(static_cast<double>(src[i]), alpha));
  }
  return out;
}

namespace {

struct AxisTap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<AxisTap> axis_taps(std::size_t in, std::size_t out) {
  std::vector<AxisTap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double max_src = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, max_src);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    taps[d] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

Tensor2D bilinear_resize(const Tensor2D& t, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw ParameterError("bilinear_resize: output dimensions must be positive");
  }
  if (t.empty()) throw ValidationError("bilinear_resize: input tensor is empty");
  if (out_h == t.height() && out_w == t.width()) return t;

  const auto ys = axis_taps(t.height(), out_h);
  const auto xs = axis_taps(t.width(), out_w);
  Tensor2D out(out_h, out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const auto& ty = ys[oy];
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const auto& tx = xs[ox];
      const double a = t(ty.lo, tx.lo);
      const double b = t(ty.lo, tx.hi);
      const double c = t(ty.hi, tx.lo);
      const double d = t(ty.hi, tx.hi);
      const double top = a + tx.frac * (b - a);
      const double bottom = c + tx.frac * (d - c);
      out(oy, ox) = static_cast<float>(top + ty.frac * (bottom - top));
    }
  }
  return out;
}

void relu_inplace(Tensor2D& t) {
  for (float& v : t.values()) v = v < 0.0f ? 0.0f : v;
}

void relu_inplace(Tensor3D& t) {
  for (float& v : t.values()) v = v < 0.0f ? 0.0f : v;
}

double tree_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return tree_sum(values.first(half)) + tree_sum(values.subspan(half));
}

}  // namespace cscore
