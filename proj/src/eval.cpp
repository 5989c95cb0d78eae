#include "vjt/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "vjt/error.hpp"
#include "vjt/io.hpp"

namespace vjt {

namespace {

using nlohmann::json;

// Maps estimate timestamps to records, rejecting duplicates and timestamps absent from truth.
std::map<double, const EstimateRecord*> align(std::span<const EstimateRecord> estimates,
                                              std::span<const TruthRecord> truth) {
  std::map<double, const TruthRecord*> truth_by_t;
  for (const TruthRecord& t : truth) {
    if (!truth_by_t.emplace(t.timestamp, &t).second) {
      throw Error(ErrorCode::TimestampMismatch, "duplicate truth timestamp");
    }
  }
  std::map<double, const EstimateRecord*> by_t;
  for (const EstimateRecord& e : estimates) {
    if (!truth_by_t.contains(e.timestamp)) {
      throw Error(ErrorCode::TimestampMismatch,
                  "estimate at t=" + format_double(e.timestamp) + " has no truth frame");
    }
    if (!by_t.emplace(e.timestamp, &e).second) {
      throw Error(ErrorCode::TimestampMismatch, "duplicate estimate timestamp");
    }
  }
  return by_t;
}

std::vector<const TruthRecord*> sorted_truth(std::span<const TruthRecord> truth) {
  std::vector<const TruthRecord*> out;
  for (const TruthRecord& t : truth) out.push_back(&t);
  std::sort(out.begin(), out.end(),
            [](const TruthRecord* a, const TruthRecord* b) { return a->timestamp < b->timestamp; });
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or(const json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

TargetStatus status_from_string(const std::string& s) {
  if (s == "tracking") return TargetStatus::Tracking;
  if (s == "lost") return TargetStatus::Lost;
  if (s == "uninitialized") return TargetStatus::Uninitialized;
  throw Error(ErrorCode::ParseError, "unknown status '" + s + "'");
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

LocalizationReport localization_metrics(std::span<const EstimateRecord> estimates,
                                        std::span<const TruthRecord> truth) {
  const auto by_t = align(estimates, truth);
  LocalizationReport report;
  double error_sum = 0.0;
  std::size_t recognized = 0;
  for (const TruthRecord* t : sorted_truth(truth)) {
    FrameError fe{t->timestamp, std::nullopt};
    const auto it = by_t.find(t->timestamp);
    if (it != by_t.end() && it->second->status == TargetStatus::Tracking && it->second->location) {
      fe.error = (*it->second->location - t->location).norm();
      error_sum += *fe.error;
      ++recognized;
    }
    report.per_frame.push_back(fe);
  }
  const std::size_t total = truth.size();
  report.recall = total > 0 ? static_cast<double>(recognized) / static_cast<double>(total) : 0.0;
  report.ale = recognized > 0 ? error_sum / static_cast<double>(recognized)
                              : std::numeric_limits<double>::quiet_NaN();
  report.wle = report.recall > 0.0 ? report.ale / report.recall
                                   : std::numeric_limits<double>::infinity();
  report.fail = recognized == 0 || report.ale > kFailAleMeters;
  return report;
}

TrackingReport tracking_accuracy(std::span<const EstimateRecord> estimates,
                                 std::span<const TruthRecord> truth, double threshold) {
  const auto by_t = align(estimates, truth);
  TrackingReport report;
  report.threshold = threshold;
  std::size_t hits = 0;
  for (const TruthRecord* t : sorted_truth(truth)) {
    FrameHit fh{t->timestamp, std::nullopt, false};
    const auto it = by_t.find(t->timestamp);
    if (it != by_t.end() && it->second->box && t->box) {
      fh.center_distance = (it->second->box->center() - t->box->center()).norm();
      fh.hit = *fh.center_distance < threshold;
    }
    if (fh.hit) ++hits;
    report.per_frame.push_back(fh);
  }
  report.accuracy =
      truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return report;
}

EstimateRecord estimate_from_result(const FrameResult& result) {
  return {result.timestamp, result.status, result.target_location, result.target_box};
}

EstimateRecord estimate_from_json(const json& j) {
  try {
    EstimateRecord e;
    e.timestamp = j.at("t").get<double>();
    e.status = status_from_string(j.at("status").get<std::string>());
    if (j.contains("target_xy")) e.location = Vec2(j["target_xy"][0].get<double>(), j["target_xy"][1].get<double>());
    if (j.contains("target_box")) e.box = box_from_json(j["target_box"]);
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("estimate record: ") + ex.what());
  }
}

TruthRecord truth_from_frame(const TruthFrame& truth) {
  const PersonTruth& target = truth.persons.at(truth.target);
  return {truth.timestamp, target.robot_xy, target.box};
}

TruthRecord truth_from_json(const json& j) {
  try {
    const int target = j.at("target").get<int>();
    const json* person = nullptr;
    for (const json& p : j.at("persons")) {
      if (p.at("id").get<int>() == target) person = &p;
    }
    if (!person) throw Error(ErrorCode::ParseError, "truth record lacks the target person");
    TruthRecord t;
    t.timestamp = j.at("t").get<double>();
    t.location = Vec2((*person)["xy"][0].get<double>(), (*person)["xy"][1].get<double>());
    if (person->contains("box") && !(*person)["box"].is_null()) t.box = box_from_json((*person)["box"]);
    return t;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("truth record: ") + ex.what());
  }
}

json report_to_json(const LocalizationReport& loc, const TrackingReport& track) {
  json frames = json::array();
  for (std::size_t i = 0; i < loc.per_frame.size(); ++i) {
    const FrameError& fe = loc.per_frame[i];
    json row = {{"t", fe.timestamp},
                {"error_m", fe.error ? json(*fe.error) : json(nullptr)}};
    if (i < track.per_frame.size()) {
      const FrameHit& fh = track.per_frame[i];
      row["center_px"] = fh.center_distance ? json(*fh.center_distance) : json(nullptr);
      row["hit"] = fh.hit;
    }
    frames.push_back(row);
  }
  return {{"localization",
           {{"ale_m", number_or_null(loc.ale)},
            {"recall", loc.recall},
            {"wle_m", number_or_null(loc.wle)},
            {"fail", loc.fail}}},
          {"tracking", {{"accuracy", track.accuracy}, {"threshold_px", track.threshold}}},
          {"frames", frames}};
}

std::pair<LocalizationReport, TrackingReport> report_from_json(const json& j) {
  try {
    LocalizationReport loc;
    const json& l = j.at("localization");
    loc.ale = number_or(l.at("ale_m"), std::numeric_limits<double>::quiet_NaN());
    loc.recall = l.at("recall").get<double>();
    loc.wle = number_or(l.at("wle_m"), std::numeric_limits<double>::infinity());
    loc.fail = l.at("fail").get<bool>();
    TrackingReport track;
    track.accuracy = j.at("tracking").at("accuracy").get<double>();
    track.threshold = j.at("tracking").at("threshold_px").get<double>();
    for (const json& row : j.at("frames")) {
      FrameError fe{row.at("t").get<double>(), std::nullopt};
      if (!row.at("error_m").is_null()) fe.error = row["error_m"].get<double>();
      loc.per_frame.push_back(fe);
      if (row.contains("hit")) {
        FrameHit fh{fe.timestamp, std::nullopt, row["hit"].get<bool>()};
        if (!row.at("center_px").is_null()) fh.center_distance = row["center_px"].get<double>();
        track.per_frame.push_back(fh);
      }
    }
    return {loc, track};
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + ex.what());
  }
}

std::string report_to_csv(const LocalizationReport& loc, const TrackingReport& track) {
  std::string out = "row,t,error_m,recognized,center_px,hit,ale_m,recall,wle_m,accuracy\n";
  for (std::size_t i = 0; i < loc.per_frame.size(); ++i) {
    const FrameError& fe = loc.per_frame[i];
    out += "frame," + format_double(fe.timestamp) + ",";
    out += fe.error ? format_double(*fe.error) : "";
    out += fe.error ? ",1," : ",0,";
    if (i < track.per_frame.size()) {
      const FrameHit& fh = track.per_frame[i];
      out += fh.center_distance ? format_double(*fh.center_distance) : "";
      out += fh.hit ? ",1" : ",0";
    } else {
      out += ",";
    }
    out += ",,,,\n";
  }
  out += "summary,,,,,," + format_double(loc.ale) + "," + format_double(loc.recall) + "," +
         format_double(loc.wle) + "," + format_double(track.accuracy) + "\n";
  return out;
}

SequenceResult run_sequence(const Scenario& scenario, const TrackerConfig& config) {
  SequenceResult result;
  result.name = scenario.name;
  result.simulation = generate(scenario);
  Session session(scenario.camera, scenario.extrinsics, config);
  std::vector<EstimateRecord> estimates;
  std::vector<TruthRecord> truth;
  for (std::size_t k = 0; k < result.simulation.detections.size(); ++k) {
    result.frames.push_back(session.process_frame(result.simulation.detections[k]));
    estimates.push_back(estimate_from_result(result.frames.back()));
    truth.push_back(truth_from_frame(result.simulation.truth[k]));
  }
  result.localization = localization_metrics(estimates, truth);
  result.tracking = tracking_accuracy(estimates, truth);
  return result;
}

std::string run_bench(const std::filesystem::path& scenario_dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(scenario_dir)) {
    throw Error(ErrorCode::IoFailure, scenario_dir.string() + " is not a directory");
  }
  for (const auto& entry : std::filesystem::directory_iterator(scenario_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::string table = "sequence              ALE(m)  Recall   WLE(m)  Acc(%)  Status\n";
  char line[256];
  for (const auto& file : files) {
    const json raw = read_json_file(file);
    const Scenario scenario = load_scenario(file);
    const TrackerConfig config =
        raw.contains("tracker") ? tracker_config_from_json(raw["tracker"]) : TrackerConfig{};
    const SequenceResult seq = run_sequence(scenario, config);
    const LocalizationReport& loc = seq.localization;
    if (loc.fail) {
      std::snprintf(line, sizeof(line), "%-20s  %6s  %6.2f  %7s  %6.1f  FAIL\n",
                    seq.name.c_str(), "x", loc.recall, "x", 100.0 * seq.tracking.accuracy);
    } else {
      std::snprintf(line, sizeof(line), "%-20s  %6.3f  %6.2f  %7.3f  %6.1f  ok\n",
                    seq.name.c_str(), loc.ale, loc.recall, loc.wle, 100.0 * seq.tracking.accuracy);
    }
    table += line;
  }
  return table;
}

}  // namespace vjt
