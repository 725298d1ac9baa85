#pragma once

// Test-only oracles and generators. The oracles are deliberately naive
// re-derivations from the defining formulas and share no code with the
// library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cscore/engine.hpp"
#include "cscore/io.hpp"
#include "cscore/tensor.hpp"

namespace cscore::testing {

namespace fs = std::filesystem;

inline Tensor2D random_map(std::mt19937_64& rng, std::size_t h, std::size_t w, float lo = 0.0f,
                           float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(h * w);
  for (float& x : v) x = dist(rng);
  return Tensor2D(h, w, std::move(v));
}

inline Tensor3D random_tensor(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t c,
                              float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(h * w * c);
  for (float& x : v) x = dist(rng);
  return Tensor3D(h, w, c, std::move(v));
}

// A random [0, 1] heatmap with exact 0 and 1 present.
inline Heatmap random_heatmap(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  return minmax_normalize(random_map(rng, h, w));
}

inline GoldList gold_with(std::span<const double> confidences, int class_id = 1,
                          const std::string& prefix = "img") {
  GoldList g;
  g.class_id = class_id;
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%s%05zu", prefix.c_str(), i);
    g.members.push_back({id, confidences[i]});
  }
  return g;
}

// Eq.-level brute force: emphasise, double loop over i < j with
// (w_i + w_j) * s_ij and Z = sum (w_i + w_j).
inline double oracle_class_cscore(const std::vector<Heatmap>& maps,
                                  const std::vector<double>& confidences, double alpha) {
  const std::size_t n = maps.size();
  if (n < 2) return 0.0;
  std::vector<std::vector<float>> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (float v : maps[i].map.values()) {
      e[i].push_back(static_cast<float>(std::pow(static_cast<double>(v), alpha)));
    }
  }
  double total = 0.0;
  for (double p : confidences) total += p;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = confidences[i] / total;
  double num = 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double mn = 0.0;
      double mx = 0.0;
      for (std::size_t p = 0; p < e[i].size(); ++p) {
        mn += std::min(e[i][p], e[j][p]);
        mx += std::max(e[i][p], e[j][p]);
      }
      const double s = mx > 0.0 ? mn / mx : 0.0;
      num += (w[i] + w[j]) * s;
      z += w[i] + w[j];
    }
  }
  return num / z;
}

// Scalar per-pixel bilinear evaluation using the four-weight form.
inline float oracle_bilinear_pixel(const Tensor2D& t, std::size_t oy, std::size_t ox,
                                   std::size_t out_h, std::size_t out_w) {
  auto src = [](std::size_t d, std::size_t in, std::size_t out) {
    double s = (d + 0.5) * (static_cast<double>(in) / out) - 0.5;
    if (s < 0) s = 0;
    if (s > in - 1.0) s = in - 1.0;
    return s;
  };
  const double sy = src(oy, t.height(), out_h);
  const double sx = src(ox, t.width(), out_w);
  const auto y0 = static_cast<std::size_t>(sy);
  const auto x0 = static_cast<std::size_t>(sx);
  const std::size_t y1 = std::min(y0 + 1, t.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, t.width() - 1);
  const double fy = sy - y0;
  const double fx = sx - x0;
  const double v = (1 - fy) * (1 - fx) * t(y0, x0) + (1 - fy) * fx * t(y0, x1) +
                   fy * (1 - fx) * t(y1, x0) + fy * fx * t(y1, x1);
  return static_cast<float>(v);
}

// Top right singular vector by plain power iteration v <- M^T M v on the
// full matrix, from a seeded random start.
inline std::vector<double> oracle_top_right_vector(const Tensor3D& a, int iterations = 3000) {
  const std::size_t rows = a.spatial_size();
  const std::size_t cols = a.channels();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> n01;
  std::vector<double> v(cols);
  for (double& x : v) x = n01(rng);
  std::vector<double> mv(rows);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0;
      for (std::size_t c = 0; c < cols; ++c) acc += a.values()[r * cols + c] * v[c];
      mv[r] = acc;
    }
    std::vector<double> next(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) next[c] += a.values()[r * cols + c] * mv[r];
    }
    double norm = 0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0) return next;
    for (std::size_t c = 0; c < cols; ++c) v[c] = next[c] / norm;
  }
  return v;
}

// EigenCAM pipeline evaluated with the oracle singular vector.
inline std::vector<double> oracle_eigencam(const Tensor3D& a) {
  const auto v = oracle_top_right_vector(a);
  const std::size_t rows = a.spatial_size();
  std::vector<double> map(rows, 0.0);
  double mean = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < a.channels(); ++c) map[r] += a.values()[r * a.channels() + c] * v[c];
    mean += map[r];
  }
  if (mean < 0) {
    for (double& x : map) x = -x;
  }
  for (double& x : map) x = std::max(x, 0.0);
  const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
  const double l = *lo;
  const double range = *hi - *lo;
  for (double& x : map) x = range > 0 ? (x - l) / range : 0.0;
  return map;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

inline std::vector<double> as_doubles(const Tensor2D& t) {
  return {t.values().begin(), t.values().end()};
}

// Fresh temporary directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("cscore-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct SyntheticManifestSpec {
  std::size_t images = 8;
  std::vector<std::string> layers = {"deep", "mid"};
  std::vector<std::array<std::size_t, 3>> shapes = {{4, 4, 6}, {8, 8, 3}};
  bool gradients = true;
  bool channel_scores = true;
  std::uint64_t seed = 7;
  std::string checkpoint = "E10";
};

// Writes a random two-class manifest and its tensors under `dir`. Image i has
// label i % 2 and confidence 0.55..0.95 for its label.
inline fs::path write_synthetic_manifest(const fs::path& dir, const SyntheticManifestSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> conf(0.55, 0.95);
  BundleManifest m;
  m.architecture = "synthetic";
  m.checkpoint_id = spec.checkpoint;
  m.classes = {"normal", "pneumonia"};
  m.target_layers = spec.layers;
  m.head = "softmax";
  m.base_dir = dir;
  for (std::size_t i = 0; i < spec.images; ++i) {
    ImageEntry img;
    img.image_id = "img" + std::to_string(i);
    img.true_label = static_cast<int>(i % 2);
    const double p = conf(rng);
    img.confidences = img.true_label == 0 ? std::vector{p, 1 - p} : std::vector{1 - p, p};
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const auto [h, w, c] = spec.shapes[l];
      LayerRef ref;
      ref.shape = {h, w, c};
      const std::string stem = img.image_id + "_" + spec.layers[l];
      const Tensor3D act = random_tensor(rng, h, w, c, 0.0f, 1.0f);
      write_tensor_file(dir / (stem + "_act.f32"), act.values());
      ref.activations = stem + "_act.f32";
      if (spec.gradients) {
        const Tensor3D g = random_tensor(rng, h, w, c, -0.5f, 1.0f);
        write_tensor_file(dir / (stem + "_grad.f32"), g.values());
        ref.gradients = stem + "_grad.f32";
      }
      if (spec.channel_scores) {
        std::vector<float> s(c);
        std::uniform_real_distribution<float> sd(0.0f, 1.0f);
        for (float& x : s) x = sd(rng);
        write_tensor_file(dir / (stem + "_scores.f32"), s);
        ref.channel_scores = stem + "_scores.f32";
      }
      img.layers.emplace(spec.layers[l], std::move(ref));
    }
    m.images.push_back(std::move(img));
  }
  const fs::path path = dir / "manifest.json";
  write_manifest(m, path);
  return path;
}

}  // namespace cscore::testing
