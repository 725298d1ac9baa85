#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cscore {

// Row-major (height, width) map of 32-bit floats. All values are finite;
// the constructor rejects NaN/Inf.
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t height, std::size_t width);  // zero-filled
  Tensor2D(std::size_t height, std::size_t width, std::vector<float> data);

  static Tensor2D filled(std::size_t height, std::size_t width, float value);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float operator()(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }
  float& operator()(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  bool same_shape(const Tensor2D& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Tensor2D&, const Tensor2D&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

// Row-major, channel-last (height, width, channels) tensor of 32-bit floats.
class Tensor3D {
 public:
  Tensor3D() = default;
  Tensor3D(std::size_t height, std::size_t width, std::size_t channels);
  Tensor3D(std::size_t height, std::size_t width, std::size_t channels,
           std::vector<float> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t spatial_size() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }

  float operator()(std::size_t y, std::size_t x, std::size_t k) const {
    return data_[(y * width_ + x) * channels_ + k];
  }
  float& operator()(std::size_t y, std::size_t x, std::size_t k) {
    return data_[(y * width_ + x) * channels_ + k];
  }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  // Extracts channel k as a 2D map.
  Tensor2D channel(std::size_t k) const;

  bool same_shape(const Tensor3D& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  friend bool operator==(const Tensor3D&, const Tensor3D&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

// A normalised attribution map with values in [0, 1]. `degenerate` is set
// when the source map had no contrast (max == min) and was zeroed.
struct Heatmap {
  Tensor2D map;
  bool degenerate = false;

  std::size_t height() const { return map.height(); }
  std::size_t width() const { return map.width(); }
};

/// Per-map min-max normalisation to [0, 1]. A constant map yields all zeros
/// with the degenerate flag set.
Heatmap minmax_normalize(const Tensor2D& t);
// Same map applied to a double-precision row-major buffer of height x width.
Heatmap minmax_normalize(std::span<const double> values, std::size_t height, std::size_t width);

/// Elementwise h^alpha. Throws ParameterError unless alpha > 0.
Heatmap power_emphasis(const Heatmap& h, double alpha);

/// Bilinear resampling with half-pixel centres and edge clamping:
/// src = (dst + 0.5) * (in / out) - 0.5, clamped to [0, in - 1].
/// Same-shape resizing returns a bit-identical copy.
Tensor2D bilinear_resize(const Tensor2D& t, std::size_t out_h, std::size_t out_w);

void relu_inplace(Tensor2D& t);
void relu_inplace(Tensor3D& t);

// Deterministic pairwise (tree) summation in double precision. The
// association order depends only on the length of the input.
double tree_sum(std::span<const double> values);

}  // namespace cscore
