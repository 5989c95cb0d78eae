// vjtrack: simulate, track, eval and bench subcommands over JSON-lines streams.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vjt/error.hpp"
#include "vjt/eval.hpp"
#include "vjt/io.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/simulator.hpp"

namespace fs = std::filesystem;

namespace {

int run_track(const std::optional<fs::path>& camera_path, const fs::path& config_path,
              const fs::path& input, const fs::path& output) {
  const vjt::RunConfig run = vjt::load_run_config(config_path);
  const std::optional<fs::path> cam_file = camera_path ? camera_path : run.camera_file;
  if (!cam_file) {
    throw vjt::Error(vjt::ErrorCode::InvalidArgument,
                     "no camera file: pass --camera or set \"camera\" in the run config");
  }
  const vjt::CameraConfig cam = vjt::camera_config_from_json(vjt::read_json_file(*cam_file));
  vjt::Session session(cam.camera, cam.extrinsics, run.tracker);

  std::vector<vjt::json> out;
  for (const vjt::json& record : vjt::read_jsonl(input)) {
    const vjt::Frame frame = vjt::frame_from_json(record, run.tracker.min_confidence);
    out.push_back(vjt::to_json(session.process_frame(frame)));
  }
  vjt::write_text_file(output, vjt::to_jsonl(out));
  return 0;
}

int run_simulate(const fs::path& scenario_path, const fs::path& det_out, const fs::path& truth_out) {
  const vjt::Scenario scenario = vjt::load_scenario(scenario_path);
  const vjt::SimulationOutput sim = vjt::generate(scenario);
  std::vector<vjt::json> dets, truth;
  for (const vjt::Frame& f : sim.detections) dets.push_back(vjt::to_json(f));
  for (const vjt::TruthFrame& t : sim.truth) truth.push_back(vjt::to_json(t));
  vjt::write_text_file(det_out, vjt::to_jsonl(dets));
  vjt::write_text_file(truth_out, vjt::to_jsonl(truth));
  return 0;
}

int run_eval(const fs::path& estimates_path, const fs::path& truth_path, double threshold,
             const std::string& format, const fs::path& out) {
  std::vector<vjt::EstimateRecord> estimates;
  std::vector<vjt::TruthRecord> truth;
  for (const vjt::json& r : vjt::read_jsonl(estimates_path)) estimates.push_back(vjt::estimate_from_json(r));
  for (const vjt::json& r : vjt::read_jsonl(truth_path)) truth.push_back(vjt::truth_from_json(r));
  const vjt::LocalizationReport loc = vjt::localization_metrics(estimates, truth);
  const vjt::TrackingReport track = vjt::tracking_accuracy(estimates, truth, threshold);
  const std::string text = format == "csv" ? vjt::report_to_csv(loc, track)
                                           : vjt::report_to_json(loc, track).dump(2) + "\n";
  vjt::write_text_file(out, text);
  return loc.fail ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-plane person localization and tracking from 2D joint detections"};
  app.require_subcommand(1);

  auto* track = app.add_subcommand("track", "Run the tracker over a detection stream");
  std::string camera, config, input, output;
  track->add_option("--camera", camera, "Camera config file")->check(CLI::ExistingFile);
  track->add_option("--config", config, "Run config file")->required()->check(CLI::ExistingFile);
  track->add_option("--input", input, "Detection stream (JSON lines)")->required()->check(CLI::ExistingFile);
  track->add_option("--output", output, "Track log to write (JSON lines)")->required();

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic detection stream");
  std::string scenario, out_det, out_truth;
  simulate->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out-detections", out_det, "Detection stream to write")->required();
  simulate->add_option("--out-truth", out_truth, "Ground-truth stream to write")->required();

  auto* eval = app.add_subcommand("eval", "Score a track log against ground truth");
  std::string estimates, truth, format = "json", eval_out;
  double threshold = vjt::kDefaultAccuracyThresholdPx;
  eval->add_option("--estimates", estimates, "Track log")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", truth, "Ground-truth stream")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold-px", threshold, "Box-center accuracy threshold")->check(CLI::PositiveNumber);
  eval->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("--out", eval_out, "Report file")->required();

  auto* bench = app.add_subcommand("bench", "Run simulate, track and eval over a scenario suite");
  std::string scenario_dir, bench_out;
  bench->add_option("--scenario-dir", scenario_dir, "Directory of scenario files")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--out", bench_out, "Write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*track) {
      return run_track(camera.empty() ? std::nullopt : std::optional<fs::path>(camera), config,
                       input, output);
    }
    if (*simulate) return run_simulate(scenario, out_det, out_truth);
    if (*eval) return run_eval(estimates, truth, threshold, format, eval_out);
    if (*bench) {
      const std::string table = vjt::run_bench(scenario_dir);
      if (bench_out.empty()) {
        std::cout << table;
      } else {
        vjt::write_text_file(bench_out, table);
      }
      return 0;
    }
  } catch (const vjt::Error& e) {
    std::cerr << "vjtrack: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vjtrack: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
