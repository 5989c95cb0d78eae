#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vjt/pipeline.hpp"
#include "vjt/simulator.hpp"

namespace vjt {

inline constexpr double kDefaultAccuracyThresholdPx = 50.0;
// Locations worse than this on average count as a failed sequence.
inline constexpr double kFailAleMeters = 5.0;

// One line of the tracker output log, reduced to what the metrics need.
struct EstimateRecord {
  double timestamp = 0.0;
  TargetStatus status = TargetStatus::Uninitialized;
  std::optional<Vec2> location;
  std::optional<BoundingBox> box;
};

// Target person's ground truth for one frame.
struct TruthRecord {
  double timestamp = 0.0;
  Vec2 location = Vec2::Zero();
  std::optional<BoundingBox> box;
};

struct FrameError {
  double timestamp = 0.0;
  std::optional<double> error;  // meters, present on recognized frames
};

struct LocalizationReport {
  double ale = 0.0;     // NaN when nothing was recognized
  double recall = 0.0;
  double wle = 0.0;     // +inf when recall is zero
  bool fail = false;
  std::vector<FrameError> per_frame;
};

struct FrameHit {
  double timestamp = 0.0;
  std::optional<double> center_distance;  // pixels, present when a target box was reported
  bool hit = false;
};

struct TrackingReport {
  double accuracy = 0.0;
  double threshold = kDefaultAccuracyThresholdPx;
  std::vector<FrameHit> per_frame;
};

// Estimates are aligned to truth by exact timestamp; frames missing from the estimates count as
// unrecognized, estimates without a truth frame raise TimestampMismatch.
LocalizationReport localization_metrics(std::span<const EstimateRecord> estimates,
                                        std::span<const TruthRecord> truth);
TrackingReport tracking_accuracy(std::span<const EstimateRecord> estimates,
                                 std::span<const TruthRecord> truth,
                                 double threshold = kDefaultAccuracyThresholdPx);

EstimateRecord estimate_from_result(const FrameResult& result);
EstimateRecord estimate_from_json(const nlohmann::json& j);
TruthRecord truth_from_frame(const TruthFrame& truth);
TruthRecord truth_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const LocalizationReport& loc, const TrackingReport& track);
std::pair<LocalizationReport, TrackingReport> report_from_json(const nlohmann::json& j);
std::string report_to_csv(const LocalizationReport& loc, const TrackingReport& track);

// simulate -> track -> eval for one scenario.
struct SequenceResult {
  std::string name;
  LocalizationReport localization;
  TrackingReport tracking;
  std::vector<FrameResult> frames;
  SimulationOutput simulation;
};

SequenceResult run_sequence(const Scenario& scenario, const TrackerConfig& config);

// Runs every *.json scenario in the directory (sorted by file name) and renders a summary table.
std::string run_bench(const std::filesystem::path& scenario_dir);

// Shortest round-trip decimal form used by the CSV writer.
std::string format_double(double value);

}  // namespace vjt
