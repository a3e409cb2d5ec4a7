#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctreg/catalog.hpp"
#include "ctreg/fusion.hpp"
#include "ctreg/registration.hpp"
#include "ctreg/transform.hpp"
#include "ctreg/volume.hpp"
#include "ctreg/volume_io.hpp"

namespace ctreg {

struct pipeline_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineOptions {
  SearchSpec search{};
  int threshold = 40;
  long long min_component_size = 0;  // 0 = keep all components
  unsigned workers = 1;
};

struct RunReport {
  std::string patient_id;
  std::string source_exam_id;  // reference frame (A)
  std::string target_exam_id;  // exam that gets resampled (B)
  RigidParams best_params;
  double best_similarity = 0.0;
  long long evaluations = 0;
  int threshold = 0;
  long long min_component_size = 0;
  long long changed = 0;
  long long total = 0;
  long long component_count = 0;
  std::vector<std::string> outputs;
  double registration_ms = 0.0;
  double fusion_ms = 0.0;
  double total_ms = 0.0;
  std::string output_dir;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["patient_id"] = r.patient_id;
  j["source_exam_id"] = r.source_exam_id;
  j["target_exam_id"] = r.target_exam_id;
  j["registration"] = {
      {"tx", r.best_params.tx},       {"ty", r.best_params.ty},
      {"tz", r.best_params.tz},       {"rx", r.best_params.rx},
      {"ry", r.best_params.ry},       {"rz", r.best_params.rz},
      {"scale", r.best_params.scale}, {"similarity", r.best_similarity},
      {"evaluations", r.evaluations}};
  j["fusion"] = {{"threshold", r.threshold},
                 {"min_component_size", r.min_component_size}};
  j["change"] = {{"changed_voxels", r.changed},
                 {"total_voxels", r.total},
                 {"components", r.component_count}};
  j["outputs"] = r.outputs;
  j["timings_ms"] = {{"registration", r.registration_ms},
                     {"fusion", r.fusion_ms},
                     {"total", r.total_ms}};
  return j;
}

// Registers `target` onto `source`, fuses, and writes every output into
// `outdir` atomically: everything goes to a temp sibling first and the
// directory is renamed only when complete.
inline RunReport run_comparison(const ExamRecord& source, const ExamRecord& target,
                                const PipelineOptions& opt,
                                const std::string& outdir) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  if (fs::exists(outdir))
    throw pipeline_error("output directory already exists: " + outdir);

  const Volume3D a = load_volume(source.volume_path);
  const Volume3D b = load_volume(target.volume_path);

  RunReport report;
  report.patient_id = source.patient_id;
  report.source_exam_id = source.exam_id;
  report.target_exam_id = target.exam_id;
  report.threshold = opt.threshold;
  report.min_component_size = opt.min_component_size;
  report.output_dir = outdir;

  const auto t_reg = std::chrono::steady_clock::now();
  const RegistrationResult reg = register_volumes(a, b, opt.search, opt.workers);
  report.registration_ms = ms_since(t_reg);
  report.best_params = reg.best_params;
  report.best_similarity = reg.best_similarity.normalized;
  report.evaluations = reg.evaluations;

  const auto t_fuse = std::chrono::steady_clock::now();
  const AffineMap map = build_transform(reg.best_params, volume_center(b));
  const Volume3D registered =
      resample(b, map, Interpolation::trilinear, opt.search.resample_background);
  const DifferenceVolume diff = difference(a, registered);
  ChangeMap change = threshold_change_map(diff, opt.threshold);
  if (opt.min_component_size > 1)
    change = filter_min_component_size(change, opt.min_component_size);
  report.fusion_ms = ms_since(t_fuse);
  report.changed = change.changed;
  report.total = change.total;
  report.component_count = static_cast<long long>(change.components.size());

  const fs::path out(outdir);
  const fs::path tmp = out.parent_path().empty()
                           ? fs::path(out.string() + ".tmp")
                           : out.parent_path() / (out.filename().string() + ".tmp");
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  try {
    const char* names[] = {"registered.ctv", "mask.ctv",  "slices.txt",
                           "components.txt", "trace.txt", "report.json"};
    for (const char* n : names) report.outputs.push_back((out / n).string());

    save_volume(registered, (tmp / "registered.ctv").string());
    write_change_report(change, {(tmp / "mask.ctv").string(),
                                 (tmp / "slices.txt").string(),
                                 (tmp / "components.txt").string()});
    write_trace(reg, (tmp / "trace.txt").string());

    report.total_ms = ms_since(t_start);
    std::ofstream rf(tmp / "report.json", std::ios::trunc);
    if (!rf) throw std::runtime_error("cannot write report.json");
    rf << report_to_json(report).dump(2) << "\n";
    if (!rf) throw std::runtime_error("write failed: report.json");
    rf.close();

    fs::rename(tmp, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  return report;
}

}  // namespace detail

/// Step 1: compare a selected prior (non-stroke) brain CT against the most
/// recent stroke-related brain CT of the patient. The prior exam is the
/// resampled target; the stroke exam is the reference frame.
inline RunReport step1_compare(const Catalog& c, const std::string& patient_id,
                               const std::string& prior_exam_id,
                               const PipelineOptions& opt,
                               const std::string& outdir) {
  const auto priors = filter_prior_exams(c, patient_id);
  const ExamRecord* prior = nullptr;
  for (const auto& e : priors)
    if (e.exam_id == prior_exam_id) prior = &e;
  if (!prior)
    throw std::invalid_argument("exam '" + prior_exam_id +
                                "' is not a prior (non-stroke) brain CT of patient '" +
                                patient_id + "'");

  const auto strokes = filter_stroke_exams(c, patient_id);
  if (strokes.empty())
    throw pipeline_error("patient '" + patient_id +
                         "' has no stroke-related brain CT exam to anchor the "
                         "comparison; acquire one (step 2 input) first");
  const ExamRecord& source = strokes.back();  // most recent
  return detail::run_comparison(source, *prior, opt, outdir);
}

/// Step 2: compare two stroke-related brain CT exams of the patient. The
/// earlier exam is the resampled target, the later one is the reference
/// frame, regardless of argument order.
inline RunReport step2_compare(const Catalog& c, const std::string& patient_id,
                               const std::string& exam_id_1,
                               const std::string& exam_id_2,
                               const PipelineOptions& opt,
                               const std::string& outdir) {
  if (exam_id_1 == exam_id_2)
    throw std::invalid_argument("step 2 needs two distinct exams, got '" +
                                exam_id_1 + "' twice");

  const auto strokes = filter_stroke_exams(c, patient_id);
  const ExamRecord* e1 = nullptr;
  const ExamRecord* e2 = nullptr;
  for (const auto& e : strokes) {
    if (e.exam_id == exam_id_1) e1 = &e;
    if (e.exam_id == exam_id_2) e2 = &e;
  }
  if (!e1 || !e2)
    throw std::invalid_argument(
        "both exams must be stroke-related brain CTs of patient '" + patient_id +
        "' (missing: " + std::string(!e1 ? exam_id_1 : exam_id_2) + ")");

  // Earlier exam becomes the target; evolution is measured in the most
  // recent frame. filter_stroke_exams already sorted by time then id.
  const bool e1_earlier =
      e1->acquired != e2->acquired ? e1->acquired < e2->acquired : e1->exam_id < e2->exam_id;
  const ExamRecord& target = e1_earlier ? *e1 : *e2;
  const ExamRecord& source = e1_earlier ? *e2 : *e1;
  return detail::run_comparison(source, target, opt, outdir);
}

}  // namespace ctreg
