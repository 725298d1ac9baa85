#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cscore/cam.hpp"
#include "cscore/cli.hpp"
#include "cscore/engine.hpp"
#include "cscore/errors.hpp"
#include "cscore/io.hpp"
#include "cscore/pipeline.hpp"

namespace py = pybind11;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

cscore::Tensor2D to_tensor2d(const FloatArray& a) {
  if (a.ndim() != 2) throw cscore::ValidationError("expected a 2-D array");
  return cscore::Tensor2D(a.shape(0), a.shape(1), std::vector<float>(a.data(), a.data() + a.size()));
}

cscore::Tensor3D to_tensor3d(const FloatArray& a) {
  if (a.ndim() != 3) throw cscore::ValidationError("expected a 3-D (height, width, channels) array");
  return cscore::Tensor3D(a.shape(0), a.shape(1), a.shape(2),
                          std::vector<float>(a.data(), a.data() + a.size()));
}

py::array_t<float> to_numpy(const cscore::Tensor2D& t) {
  py::array_t<float> out({t.height(), t.width()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

std::vector<cscore::Heatmap> to_heatmaps(const FloatArray& stack) {
  if (stack.ndim() != 3) throw cscore::ValidationError("expected an (n, height, width) array");
  const std::size_t n = stack.shape(0), h = stack.shape(1), w = stack.shape(2);
  std::vector<cscore::Heatmap> maps;
  maps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = stack.data() + i * h * w;
    maps.push_back({cscore::Tensor2D(h, w, std::vector<float>(p, p + h * w)), false});
  }
  return maps;
}

cscore::ActivationBundle make_bundle(const FloatArray& activations, std::optional<FloatArray> gradients,
                                     std::optional<std::vector<double>> channel_scores) {
  cscore::ActivationBundle b;
  b.activations = to_tensor3d(activations);
  if (gradients) b.gradients = to_tensor3d(*gradients);
  b.channel_scores = std::move(channel_scores);
  return b;
}

py::dict class_dict(const cscore::ClassConsistencyResult& r) {
  py::dict d;
  d["class_id"] = r.class_id;
  d["method"] = std::string(cscore::method_name(r.method));
  d["cscore"] = r.cscore;
  d["gold_size"] = r.gold_size;
  d["degenerate_pairs"] = r.degenerate_pairs;
  d["empty_gold"] = r.empty_gold;
  d["singleton_gold"] = r.singleton_gold;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cscore, m) {
  m.doc() = "Explanation-consistency scoring for CAM heatmaps";

  py::register_exception<cscore::InputError>(m, "InputError", PyExc_ValueError);

  std::vector<std::string> names;
  for (auto method : cscore::kAllMethods) names.emplace_back(cscore::method_name(method));
  m.attr("METHODS") = names;

  m.def(
      "minmax_normalize",
      [](const FloatArray& a) {
        const auto h = cscore::minmax_normalize(to_tensor2d(a));
        return py::make_tuple(to_numpy(h.map), h.degenerate);
      },
      py::arg("map"), "Min-max normalise to [0, 1]; returns (map, degenerate).");

  m.def(
      "power_emphasis",
      [](const FloatArray& a, double alpha) {
        return to_numpy(cscore::power_emphasis({to_tensor2d(a), false}, alpha).map);
      },
      py::arg("map"), py::arg("alpha"));

  m.def(
      "bilinear_resize",
      [](const FloatArray& a, std::size_t out_h, std::size_t out_w) {
        return to_numpy(cscore::bilinear_resize(to_tensor2d(a), out_h, out_w));
      },
      py::arg("map"), py::arg("out_h"), py::arg("out_w"));

  m.def(
      "soft_iou",
      [](const FloatArray& a, const FloatArray& b) {
        return cscore::soft_iou(to_tensor2d(a), to_tensor2d(b)).value;
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "compose",
      [](const std::string& method, const FloatArray& activations, std::optional<FloatArray> gradients,
         std::optional<std::vector<double>> channel_scores) {
        const auto h = cscore::compose(cscore::parse_method(method),
                                       make_bundle(activations, gradients, channel_scores));
        return py::make_tuple(to_numpy(h.map), h.degenerate);
      },
      py::arg("method"), py::arg("activations"), py::arg("gradients") = py::none(),
      py::arg("channel_scores") = py::none(),
      "Compose one heatmap from (height, width, channels) arrays; returns (map, degenerate).");

  m.def(
      "ms_gradcam_pp",
      [](const std::vector<std::pair<FloatArray, FloatArray>>& layers, std::size_t out_h,
         std::size_t out_w) {
        std::vector<cscore::ActivationBundle> bundles;
        for (const auto& [a, g] : layers) bundles.push_back(make_bundle(a, g, std::nullopt));
        const auto h = cscore::ms_gradcam_pp(bundles, out_h, out_w);
        return py::make_tuple(to_numpy(h.map), h.degenerate);
      },
      py::arg("layers"), py::arg("out_h"), py::arg("out_w"));

  m.def(
      "form_gold_list",
      [](const std::vector<std::string>& ids, const std::vector<int>& labels,
         const std::vector<double>& confidences, int class_id, double tau) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& g : cscore::form_gold_list(ids, labels, confidences, class_id, tau).members) {
          out.emplace_back(g.image_id, g.confidence);
        }
        return out;
      },
      py::arg("image_ids"), py::arg("labels"), py::arg("confidences"), py::arg("class_id"),
      py::arg("tau") = cscore::kDefaultTau);

  m.def(
      "class_cscore",
      [](const FloatArray& heatmaps, const std::vector<double>& confidences,
         std::optional<std::vector<std::string>> image_ids, double alpha, unsigned workers) {
        auto maps = to_heatmaps(heatmaps);
        if (confidences.size() != maps.size()) {
          throw cscore::ValidationError("one confidence per heatmap is required");
        }
        cscore::GoldList gold;
        for (std::size_t i = 0; i < maps.size(); ++i) {
          std::string id = image_ids ? image_ids->at(i) : std::to_string(1000000000 + i);
          gold.members.push_back({std::move(id), confidences[i]});
        }
        cscore::ClassConsistencyResult r;
        {
          py::gil_scoped_release release;
          r = cscore::class_cscore(maps, gold, alpha, cscore::CamMethod::GradCAM, {workers});
        }
        py::dict d = class_dict(r);
        d.attr("pop")("method");
        return d;
      },
      py::arg("heatmaps"), py::arg("confidences"), py::arg("image_ids") = py::none(),
      py::arg("alpha") = cscore::kDefaultAlpha, py::arg("workers") = 0u,
      "Class C-Score of an (n, height, width) stack of [0, 1] heatmaps.");

  m.def(
      "pairwise_matrix",
      [](const FloatArray& heatmaps, double alpha, unsigned workers) {
        const auto maps = to_heatmaps(heatmaps);
        const auto sm = cscore::pairwise_matrix(maps, alpha, {workers});
        py::array_t<double> out({sm.n, sm.n});
        std::copy(sm.values.begin(), sm.values.end(), out.mutable_data());
        return out;
      },
      py::arg("heatmaps"), py::arg("alpha") = cscore::kDefaultAlpha, py::arg("workers") = 0u);

  m.def(
      "score_manifest",
      [](const std::filesystem::path& manifest, double tau, double alpha,
         const std::string& methods, std::optional<std::filesystem::path> reference,
         unsigned workers) {
        cscore::RunConfig config;
        config.tau = tau;
        config.alpha = alpha;
        config.methods = cscore::parse_method_list(methods);
        config.workers = workers;
        config.validate();
        const auto m = cscore::read_manifest(manifest);
        std::optional<cscore::BundleManifest> ref;
        if (reference) ref = cscore::read_manifest(*reference);
        const auto results = cscore::score_checkpoint(m, config, ref ? &*ref : nullptr);
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["method"] = std::string(cscore::method_name(r.method));
          d["cscore"] = r.cscore;
          d["all_empty"] = r.all_empty;
          py::list per_class;
          for (const auto& c : r.per_class) per_class.append(class_dict(c));
          d["per_class"] = per_class;
          out.append(d);
        }
        return out;
      },
      py::arg("manifest"), py::arg("tau") = cscore::kDefaultTau,
      py::arg("alpha") = cscore::kDefaultAlpha,
      py::arg("methods") = "gradcam,gradcampp,layercam,eigencam,scorecam,msgradcampp",
      py::arg("reference") = py::none(), py::arg("workers") = 0u);

  m.def(
      "cli_main", [](const std::vector<std::string>& args) {
        std::vector<std::string> argv = {"cscore"};
        argv.insert(argv.end(), args.begin(), args.end());
        return cscore::cli_main(argv);
      },
      py::arg("args"), "Run the command line with the given arguments; returns the exit code.");
}
