#include "cscore/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cscore/errors.hpp"
#include "cscore/io.hpp"
#include "cscore/pipeline.hpp"
#include "cscore/reference_tables.hpp"
#include "json.hpp"

namespace cscore {
namespace {

std::array<std::size_t, 2> parse_size(const std::string& text) {
  const auto x = text.find('x');
  std::size_t h = 0;
  std::size_t w = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    h = std::stoul(text.substr(0, x));
    w = std::stoul(text.substr(x + 1));
  } catch (const std::exception&) {
    throw ParameterError("size must look like HEIGHTxWIDTH, got '" + text + "'");
  }
  if (h == 0 || w == 0) throw ParameterError("size dimensions must be positive");
  return {h, w};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string safe_file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

struct ComposeFlags {
  std::string ms_layers;
  std::string ms_size;
  unsigned workers = 0;

  void add_to(CLI::App* app) {
    app->add_option("--ms-layers", ms_layers,
                    "Comma-separated layers aggregated by msgradcampp (default: all target layers)");
    app->add_option("--ms-size", ms_size, "msgradcampp output size as HEIGHTxWIDTH");
    app->add_option("--workers", workers, "Worker threads (default: $CSCORE_WORKERS or all cores)");
  }

  void apply(RunConfig& config) const {
    config.ms_layers = split_list(ms_layers);
    if (!ms_size.empty()) config.ms_size = parse_size(ms_size);
    config.workers = workers;
  }
};

int run_cam(const std::string& manifest_path, const std::string& method_text,
            const std::string& out_dir, const std::vector<std::string>& only,
            const ComposeFlags& flags) {
  RunConfig config;
  flags.apply(config);
  config.methods = {parse_method(method_text)};
  config.validate();
  const BundleManifest manifest = read_manifest(manifest_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    const auto& img = manifest.images[i];
    if (!only.empty() && std::find(only.begin(), only.end(), img.image_id) == only.end()) continue;
    const Heatmap h = compose_image(manifest, i, config.methods.front(), config);
    const std::string file = safe_file_stem(img.image_id) + "." + method_text + ".f32";
    write_tensor_file(fs::path(out_dir) / file, h.map.values());
    index.push_back({{"image_id", img.image_id},
                     {"method", method_text},
                     {"shape", {h.height(), h.width()}},
                     {"degenerate", h.degenerate},
                     {"file", file}});
  }
  write_text_file(fs::path(out_dir) / "heatmaps.json", index.dump(2) + "\n");
  std::cout << "wrote " << index.size() << " heatmaps to " << out_dir << "\n";
  return kExitOk;
}

int run_score(const std::string& manifest_path, const std::string& reference_path,
              const std::string& out, RunConfig config) {
  config.validate();
  const BundleManifest manifest = read_manifest(manifest_path);
  std::optional<BundleManifest> reference;
  if (!reference_path.empty()) reference = read_manifest(reference_path);
  const auto results = score_checkpoint(manifest, config, reference ? &*reference : nullptr);

  std::vector<ScoreRow> rows;
  for (const auto& r : results) {
    auto part = rows_from_result(manifest.checkpoint_id, r);
    rows.insert(rows.end(), part.begin(), part.end());
    std::printf("%-12s global %.3f", std::string(method_name(r.method)).c_str(), r.cscore);
    for (const auto& c : r.per_class) {
      std::printf("  class %d: %.3f (|G|=%zu%s)", c.class_id, c.cscore, c.gold_size,
                  c.empty_gold ? ", empty" : (c.singleton_gold ? ", singleton" : ""));
    }
    std::printf("\n");
  }
  write_cscore_report(std::move(rows), out);
  std::cout << "report written to " << out << "\n";
  return kExitOk;
}

struct TrajectoryFlags {
  std::string metrics;
  std::string scores;
  std::string alerts;
  std::string mode = "global";
  int from = 0;
  int to = 0;
};

int run_trajectory(const TrajectoryFlags& f, RunConfig config) {
  config.validate();
  CollapseMode mode = CollapseMode::Global;
  if (f.mode == "per-class") {
    mode = CollapseMode::PerClass;
  } else if (f.mode != "global") {
    throw ParameterError("--collapse-mode must be 'global' or 'per-class'");
  }
  const auto metrics = read_epoch_metrics(f.metrics);
  const auto scores = read_cscore_report(f.scores);
  const TrajectorySeries series = assemble_series(metrics, scores, config.phases);
  const auto methods = series.methods();

  std::printf("epoch phase    auc    acc");
  for (CamMethod m : methods) std::printf(" %11s", std::string(method_name(m)).c_str());
  std::printf("\n");
  for (const auto& r : series.records()) {
    std::printf("%5d %5s %.4f %.4f", r.epoch, std::string(phase_name(r.phase)).c_str(), r.auc,
                r.accuracy);
    for (CamMethod m : methods) {
      const auto g = r.global_score(m);
      if (g) {
        std::printf(" %11.3f", *g);
      } else {
        std::printf(" %11s", "-");
      }
    }
    std::printf("\n");
  }
  if (f.from > 0 || f.to > 0) {
    std::printf("net change E%d -> E%d:", f.from, f.to);
    for (CamMethod m : methods) {
      std::printf(" %s %+.3f", std::string(method_name(m)).c_str(),
                  net_change(series, m, f.from, f.to));
    }
    std::printf("\n");
  }

  const auto alerts = detect_all(series, config.thresholds, mode);
  for (const Alert& a : alerts) {
    std::printf("alert %s epoch %d", std::string(alert_kind_name(a.kind)).c_str(), a.epoch);
    if (a.method) std::printf(" method %s", std::string(method_name(*a.method)).c_str());
    if (a.class_id) std::printf(" class %d", *a.class_id);
    std::printf("\n");
  }
  if (!f.alerts.empty()) write_alerts_json(alerts, f.alerts);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"C-Score: explanation consistency for CAM heatmaps"};
  app.require_subcommand(1);

  RunConfig config;
  ComposeFlags compose_flags;

  // cam
  std::string cam_manifest;
  std::string cam_method;
  std::string cam_out;
  std::vector<std::string> cam_images;
  auto* cam = app.add_subcommand("cam", "Compose heatmaps for one manifest");
  cam->add_option("--manifest", cam_manifest, "Bundle manifest JSON")->required();
  cam->add_option("--method", cam_method, "CAM method")->required();
  cam->add_option("--out-dir", cam_out, "Output directory for .f32 heatmaps")->required();
  cam->add_option("--image", cam_images, "Restrict to these image ids");
  compose_flags.add_to(cam);

  // score
  std::string score_manifest;
  std::string score_reference;
  std::string score_out;
  std::string score_methods = "gradcam,gradcampp,layercam,eigencam,scorecam,msgradcampp";
  auto* score = app.add_subcommand("score", "C-Scores for one checkpoint");
  score->add_option("--manifest", score_manifest, "Bundle manifest JSON")->required();
  score->add_option("--reference-manifest", score_reference,
                    "Take gold lists from this (reference) checkpoint instead");
  score->add_option("--tau", config.tau, "Gold-list confidence threshold");
  score->add_option("--alpha", config.alpha, "Intensity emphasis exponent");
  score->add_option("--methods", score_methods, "Comma-separated CAM methods");
  score->add_option("--out", score_out, "Output report CSV")->required();
  compose_flags.add_to(score);

  // trajectory
  TrajectoryFlags traj;
  auto* trajectory = app.add_subcommand("trajectory", "Checkpoint series and dissociation alerts");
  trajectory->add_option("--metrics", traj.metrics, "epoch_metrics.csv")->required();
  trajectory->add_option("--scores", traj.scores, "Score report CSV")->required();
  trajectory->add_option("--alerts", traj.alerts, "Write alerts JSON here");
  trajectory->add_option("--phase-boundary", config.phases.boundary, "Last transfer-learning epoch");
  trajectory->add_option("--auc-floor", config.thresholds.auc_floor);
  trajectory->add_option("--drop-ratio", config.thresholds.drop_ratio);
  trajectory->add_option("--collapse-floor", config.thresholds.collapse_floor);
  trajectory->add_option("--gap-min", config.thresholds.gap_min);
  trajectory->add_option("--collapse-mode", traj.mode, "global or per-class");
  trajectory->add_option("--from", traj.from, "Net change start epoch");
  trajectory->add_option("--to", traj.to, "Net change end epoch");

  // fixtures
  std::string fixtures_out;
  auto* fixtures = app.add_subcommand("fixtures", "Regenerate the reference trajectory fixtures");
  fixtures->add_option("--out-dir", fixtures_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*cam) return run_cam(cam_manifest, cam_method, cam_out, cam_images, compose_flags);
    if (*score) {
      compose_flags.apply(config);
      config.methods = parse_method_list(score_methods);
      return run_score(score_manifest, score_reference, score_out, config);
    }
    if (*trajectory) return run_trajectory(traj, config);
    if (*fixtures) {
      for (const auto& dir : write_reference_fixtures(fixtures_out)) {
        std::cout << "wrote " << dir.string() << "\n";
      }
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInvalid;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cscore
