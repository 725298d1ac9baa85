#include "cscore/cam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cscore/errors.hpp"

namespace cscore {

std::string_view method_name(CamMethod m) {
  switch (m) {
    case CamMethod::GradCAM: return "gradcam";
    case CamMethod::GradCAMpp: return "gradcampp";
    case CamMethod::LayerCAM: return "layercam";
    case CamMethod::EigenCAM: return "eigencam";
    case CamMethod::ScoreCAM: return "scorecam";
    case CamMethod::MSGradCAMpp: return "msgradcampp";
  }
  return "unknown";
}

CamMethod parse_method(std::string_view name) {
  for (CamMethod m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("unknown CAM method '" + std::string(name) +
                        "' (expected one of gradcam, gradcampp, layercam, eigencam, "
                        "scorecam, msgradcampp)");
}

std::vector<CamMethod> parse_method_list(std::string_view text) {
  std::vector<CamMethod> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, comma - start);
    if (!item.empty()) {
      const CamMethod m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = comma + 1;
  }
  if (out.empty()) throw ValidationError("method list is empty");
  return out;
}

bool method_needs_gradients(CamMethod m) {
  return m == CamMethod::GradCAM || m == CamMethod::GradCAMpp || m == CamMethod::LayerCAM ||
         m == CamMethod::MSGradCAMpp;
}

void ActivationBundle::validate() const {
  if (gradients && !gradients->same_shape(activations)) {
    throw ValidationError("bundle " + image_id + "/" + layer_id +
                          ": gradient shape does not match activation shape");
  }
  if (channel_scores && channel_scores->size() != activations.channels()) {
    throw ValidationError("bundle " + image_id + "/" + layer_id + ": " +
                          std::to_string(channel_scores->size()) + " channel scores for " +
                          std::to_string(activations.channels()) + " channels");
  }
}

namespace {

const Tensor3D& require_gradients(const ActivationBundle& b, const char* method) {
  b.validate();
  if (!b.gradients) {
    throw MethodRequirementsError(std::string(method) + " requires gradients (bundle " +
                                  b.image_id + "/" + b.layer_id + ")");
  }
  return *b.gradients;
}

// sum_k weights[k] * A_k, accumulated in double.
std::vector<double> weighted_channel_sum(const Tensor3D& a, std::span<const double> weights) {
  const std::size_t channels = a.channels();
  const auto data = a.values();
  std::vector<double> raw(a.spatial_size(), 0.0);
  for (std::size_t p = 0; p < raw.size(); ++p) {
    const float* row = data.data() + p * channels;
    double acc = 0.0;
    for (std::size_t k = 0; k < channels; ++k) acc += weights[k] * static_cast<double>(row[k]);
    raw[p] = acc;
  }
  return raw;
}

Heatmap relu_normalize(std::vector<double> raw, std::size_t h, std::size_t w) {
  for (double& v : raw) v = v < 0.0 ? 0.0 : v;
  return minmax_normalize(raw, h, w);
}

}  // namespace

Heatmap gradcam(const ActivationBundle& b) {
  const Tensor3D& g = require_gradients(b, "gradcam");
  const std::size_t channels = g.channels();
  const auto gv = g.values();
  std::vector<double> weights(channels, 0.0);
  for (std::size_t p = 0; p < g.spatial_size(); ++p) {
    for (std::size_t k = 0; k < channels; ++k) weights[k] += gv[p * channels + k];
  }
  const double z = static_cast<double>(g.spatial_size());
  for (double& w : weights) w /= z;
  return relu_normalize(weighted_channel_sum(b.activations, weights), g.height(), g.width());
}

Heatmap gradcam_pp(const ActivationBundle& b) {
  const Tensor3D& g = require_gradients(b, "gradcampp");
  const Tensor3D& a = b.activations;
  const std::size_t channels = a.channels();
  const std::size_t spatial = a.spatial_size();
  const auto av = a.values();
  const auto gv = g.values();

  std::vector<double> act_sum(channels, 0.0);
  for (std::size_t p = 0; p < spatial; ++p) {
    for (std::size_t k = 0; k < channels; ++k) act_sum[k] += av[p * channels + k];
  }

  std::vector<double> weights(channels, 0.0);
  for (std::size_t p = 0; p < spatial; ++p) {
    for (std::size_t k = 0; k < channels; ++k) {
      const double grad = gv[p * channels + k];
      const double g2 = grad * grad;
      const double denom = 2.0 * g2 + act_sum[k] * g2 * grad;
      const double pixel_weight = denom != 0.0 ? g2 / denom : 0.0;
      weights[k] += pixel_weight * std::max(grad, 0.0);
    }
  }
  return relu_normalize(weighted_channel_sum(a, weights), a.height(), a.width());
}

Heatmap layercam(const ActivationBundle& b) {
  const Tensor3D& g = require_gradients(b, "layercam");
  const std::size_t channels = g.channels();
  const auto av = b.activations.values();
  const auto gv = g.values();
  std::vector<double> raw(g.spatial_size(), 0.0);
  for (std::size_t p = 0; p < raw.size(); ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < channels; ++k) {
      const double grad = gv[p * channels + k];
      acc += std::max(grad, 0.0) * static_cast<double>(av[p * channels + k]);
    }
    raw[p] = acc;
  }
  return relu_normalize(std::move(raw), g.height(), g.width());
}

TopSingular top_singular_vectors(std::span<const float> m, std::size_t rows, std::size_t cols,
                                 double tol, int max_iter) {
  if (m.size() != rows * cols) {
    throw ValidationError("top_singular_vectors: matrix size does not match shape");
  }
  TopSingular out;
  out.left.assign(rows, 0.0);
  out.right.assign(cols, 0.0);

  // Power iteration on the smaller of M^T M (cols x cols) and M M^T (rows x rows).
  const bool on_columns = cols <= rows;
  const std::size_t n = on_columns ? cols : rows;
  std::vector<double> gram(n * n, 0.0);
  if (on_columns) {
    for (std::size_t r = 0; r < rows; ++r) {
      const float* row = m.data() + r * cols;
      for (std::size_t i = 0; i < cols; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        for (std::size_t j = i; j < cols; ++j) gram[i * n + j] += ri * static_cast<double>(row[j]);
      }
    }
  } else {
    for (std::size_t i = 0; i < rows; ++i) {
      const float* ri = m.data() + i * cols;
      for (std::size_t j = i; j < rows; ++j) {
        const float* rj = m.data() + j * cols;
        double acc = 0.0;
        for (std::size_t k = 0; k < cols; ++k) acc += static_cast<double>(ri[k]) * rj[k];
        gram[i * n + j] = acc;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[i * n + j] = gram[j * n + i];
  }

  auto multiply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gram[i * n + j] * x[j];
      y[i] = acc;
    }
  };
  auto norm = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  };

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n, 0.0);
  multiply(x, y);
  double lambda = norm(y);
  if (lambda == 0.0) {
    // The all-ones start is orthogonal to the dominant eigenvector; restart
    // from the coordinate with the largest diagonal entry.
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (gram[i * n + i] > gram[best * n + best]) best = i;
    }
    if (gram[best * n + best] == 0.0) return out;  // zero matrix
    std::fill(x.begin(), x.end(), 0.0);
    x[best] = 1.0;
    multiply(x, y);
    lambda = norm(y);
  }
  int it = 1;
  for (;; ++it) {
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = y[i] / lambda;
      diff += (next - x[i]) * (next - x[i]);
      x[i] = next;
    }
    if (std::sqrt(diff) < tol || it >= max_iter) break;
    multiply(x, y);
    lambda = norm(y);
    if (lambda == 0.0) break;
  }
  out.iterations = it;
  out.sigma = std::sqrt(lambda);

  if (on_columns) {
    out.right = x;
    for (std::size_t r = 0; r < rows; ++r) {
      const float* row = m.data() + r * cols;
      double acc = 0.0;
      for (std::size_t k = 0; k < cols; ++k) acc += static_cast<double>(row[k]) * x[k];
      out.left[r] = out.sigma > 0.0 ? acc / out.sigma : 0.0;
    }
  } else {
    out.left = x;
    for (std::size_t k = 0; k < cols; ++k) {
      double acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r) acc += static_cast<double>(m[r * cols + k]) * x[r];
      out.right[k] = out.sigma > 0.0 ? acc / out.sigma : 0.0;
    }
  }
  return out;
}

Heatmap eigencam(const ActivationBundle& b) {
  b.validate();
  const Tensor3D& a = b.activations;
  const std::size_t spatial = a.spatial_size();
  const std::size_t channels = a.channels();
  const TopSingular sv = top_singular_vectors(a.values(), spatial, channels);

  std::vector<double> raw(spatial, 0.0);
  if (sv.sigma > 0.0) {
    if (channels <= spatial) {
      // Projection M v1; exact for a single channel (v1 = [1]).
      raw = weighted_channel_sum(a, sv.right);
    } else {
      // M v1 = sigma * u1; the positive scale is removed by normalisation.
      raw = sv.left;
    }
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(spatial);
    if (mean < 0.0) {
      for (double& v : raw) v = -v;
    }
  }
  return relu_normalize(std::move(raw), a.height(), a.width());
}

Heatmap scorecam(const ActivationBundle& b) {
  b.validate();
  if (!b.channel_scores) {
    throw MethodRequirementsError("scorecam requires channel scores (bundle " + b.image_id +
                                  "/" + b.layer_id + ")");
  }
  const Tensor3D& a = b.activations;
  return relu_normalize(weighted_channel_sum(a, *b.channel_scores), a.height(), a.width());
}

Heatmap mean_aggregate(std::span<const Tensor2D> maps, std::size_t out_h, std::size_t out_w) {
  if (maps.empty()) throw ParameterError("mean_aggregate: no maps to aggregate");
  if (out_h == 0 || out_w == 0) throw ParameterError("mean_aggregate: output size must be positive");
  std::vector<double> acc(out_h * out_w, 0.0);
  for (const Tensor2D& m : maps) {
    const Tensor2D up = bilinear_resize(m, out_h, out_w);
    const auto v = up.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  const double k = static_cast<double>(maps.size());
  for (double& v : acc) v /= k;
  return minmax_normalize(acc, out_h, out_w);
}

Heatmap ms_gradcam_pp(std::span<const ActivationBundle> bundles, std::size_t out_h,
                      std::size_t out_w) {
  if (bundles.empty()) throw ParameterError("msgradcampp: bundle list is empty");
  if (out_h == 0 || out_w == 0) throw ParameterError("msgradcampp: output size must be positive");
  std::vector<Tensor2D> maps;
  maps.reserve(bundles.size());
  for (const ActivationBundle& b : bundles) {
    if (!b.gradients) {
      throw MethodRequirementsError("msgradcampp requires gradients at every layer (bundle " +
                                    b.image_id + "/" + b.layer_id + ")");
    }
    maps.push_back(gradcam_pp(b).map);
  }
  return mean_aggregate(maps, out_h, out_w);
}

Heatmap compose(CamMethod m, const ActivationBundle& b) {
  switch (m) {
    case CamMethod::GradCAM: return gradcam(b);
    case CamMethod::GradCAMpp: return gradcam_pp(b);
    case CamMethod::LayerCAM: return layercam(b);
    case CamMethod::EigenCAM: return eigencam(b);
    case CamMethod::ScoreCAM: return scorecam(b);
    case CamMethod::MSGradCAMpp:
      return ms_gradcam_pp(std::span(&b, 1), b.activations.height(), b.activations.width());
  }
  throw ValidationError("compose: unknown method");
}

}  // namespace cscore
