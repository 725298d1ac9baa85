#include "cscore/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "cscore/errors.hpp"

namespace cscore {
namespace {

std::vector<std::string> ms_layers(const BundleManifest& manifest, const RunConfig& config) {
  if (config.ms_layers.empty()) return manifest.target_layers;
  for (const auto& layer : config.ms_layers) {
    if (std::find(manifest.target_layers.begin(), manifest.target_layers.end(), layer) ==
        manifest.target_layers.end()) {
      throw ValidationError("multi-scale layer '" + layer + "' is not a manifest target layer");
    }
  }
  return config.ms_layers;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  const std::size_t w = std::min<std::size_t>(std::max(1u, workers), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < w; ++t) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::array<std::size_t, 2> ms_output_size(const BundleManifest& manifest, const RunConfig& config) {
  if (config.ms_size) return *config.ms_size;
  if (manifest.input_size) return *manifest.input_size;
  std::array<std::size_t, 2> size{0, 0};
  if (manifest.images.empty()) return size;
  for (const auto& layer : ms_layers(manifest, config)) {
    const auto& ref = manifest.images.front().layers.at(layer);
    size[0] = std::max(size[0], ref.shape[0]);
    size[1] = std::max(size[1], ref.shape[1]);
  }
  return size;
}

Heatmap compose_image(const BundleManifest& manifest, std::size_t image_index, CamMethod method,
                      const RunConfig& config) {
  if (method != CamMethod::MSGradCAMpp) {
    return compose(method, manifest.load_bundle(image_index, manifest.target_layers.front()));
  }
  std::vector<ActivationBundle> bundles;
  for (const auto& layer : ms_layers(manifest, config)) {
    bundles.push_back(manifest.load_bundle(image_index, layer));
  }
  const auto [h, w] = ms_output_size(manifest, config);
  return ms_gradcam_pp(bundles, h, w);
}

GoldList manifest_gold_list(const BundleManifest& manifest, int class_id, double tau) {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> conf;
  for (const auto& img : manifest.images) {
    ids.push_back(img.image_id);
    labels.push_back(img.true_label);
    conf.push_back(img.confidences.at(static_cast<std::size_t>(class_id)));
  }
  return form_gold_list(ids, labels, conf, class_id, tau, manifest.checkpoint_id);
}

std::vector<GlobalConsistencyResult> score_checkpoint(const BundleManifest& manifest,
                                                      const RunConfig& config,
                                                      const BundleManifest* reference) {
  config.validate();
  const BundleManifest& gold_source = reference ? *reference : manifest;
  if (reference && reference->classes.size() != manifest.classes.size()) {
    throw ValidationError("reference manifest has a different class list");
  }
  const unsigned workers = resolve_workers(config.workers);

  std::vector<GoldList> golds;
  std::vector<std::vector<std::size_t>> member_images;  // indices into `manifest`
  for (std::size_t c = 0; c < manifest.classes.size(); ++c) {
    GoldList gold = manifest_gold_list(gold_source, static_cast<int>(c), config.tau);
    gold.checkpoint_id = manifest.checkpoint_id;
    std::vector<std::size_t> idx;
    for (const auto& m : gold.members) {
      const auto i = manifest.find_image(m.image_id);
      if (!i) {
        throw ValidationError("reference gold member '" + m.image_id +
                              "' is missing from manifest " + manifest.checkpoint_id);
      }
      idx.push_back(*i);
    }
    golds.push_back(std::move(gold));
    member_images.push_back(std::move(idx));
  }

  std::vector<GlobalConsistencyResult> results;
  for (CamMethod method : config.methods) {
    std::vector<ClassConsistencyResult> per_class;
    for (std::size_t c = 0; c < golds.size(); ++c) {
      const auto& idx = member_images[c];
      std::vector<Heatmap> maps(idx.size());
      parallel_for(idx.size(), workers,
                   [&](std::size_t i) { maps[i] = compose_image(manifest, idx[i], method, config); });
      per_class.push_back(class_cscore(maps, golds[c], config.alpha, method, {workers}));
    }
    results.push_back(global_cscore(per_class));
  }
  return results;
}

}  // namespace cscore
