// ctreg — serial CT volume registration and change detection.
//
// Volumes travel in the CTV container (see README). The pipeline subcommands
// drive the full workflow: pick exams from a catalog, register the target
// onto the source, subtract, threshold, and write a run report.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctreg/ctreg.hpp"

namespace {

using namespace ctreg;

struct SimFlags {
  std::vector<int> interval{1};
  int radius = -1;  // negative = unbounded
  int stride = 1;
  int max_patch = 0;  // 0 = uncapped
};

struct QuantFlags {
  int levels = 16;
  int qmin = -1024;
  int qmax = 3071;
};

struct SearchFlags {
  std::vector<double> trans_range{15.0};
  std::vector<double> trans_step{3.0};
  std::vector<double> rot_range{0.2};
  std::vector<double> rot_step{0.05};
  double scale_range = 0.0;
  double scale_step = 0.02;
  int refine = 3;
  int pyramid = 0;
  int resample_background = kDefaultResampleBackground;
  SimFlags sim{std::vector<int>{2}, 2, 2, 8};
  unsigned workers = 0;  // 0 = all hardware threads
};

template <typename T>
std::array<T, 3> broadcast3(const std::vector<T>& v, const std::string& flag) {
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw CLI::ValidationError(flag, "expects 1 or 3 comma-separated values");
}

SimilarityParams to_similarity(const SimFlags& f) {
  SimilarityParams p;
  const auto iv = broadcast3(f.interval, "--interval");
  p.intervals = {iv[0], iv[1], iv[2]};
  if (f.radius >= 0) p.neighborhood_radius = f.radius;
  p.anchor_stride = f.stride;
  if (f.max_patch > 0) p.max_patch = f.max_patch;
  return p;
}

QuantizationSpec to_quantization(const QuantFlags& f) {
  return QuantizationSpec{f.levels, f.qmin, f.qmax};
}

SearchSpec to_search(const SearchFlags& f, const QuantFlags& q) {
  SearchSpec s;
  s.translation_range = broadcast3(f.trans_range, "--trans-range");
  s.translation_step = broadcast3(f.trans_step, "--trans-step");
  s.rotation_range = broadcast3(f.rot_range, "--rot-range");
  s.rotation_step = broadcast3(f.rot_step, "--rot-step");
  s.scale_range = f.scale_range;
  s.scale_step = f.scale_step;
  s.refinement_levels = f.refine;
  s.pyramid_levels = f.pyramid;
  s.resample_background = f.resample_background;
  s.similarity = to_similarity(f.sim);
  s.quantization = to_quantization(q);
  return s;
}

void add_sim_flags(CLI::App* app, SimFlags& f) {
  app->add_option("--interval", f.interval,
                  "Sampling interval per axis (dx[,dy,dz]); voxels off this "
                  "lattice are skipped during matching")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--radius", f.radius,
                  "Neighborhood radius for candidate anchors; negative searches "
                  "the whole volume")
      ->capture_default_str();
  app->add_option("--stride", f.stride, "Anchor stride per axis")
      ->capture_default_str();
  app->add_option("--max-patch", f.max_patch,
                  "Cap on patch side length (0 = no cap)")
      ->capture_default_str();
}

void add_quant_flags(CLI::App* app, QuantFlags& f) {
  app->add_option("--levels", f.levels, "Quantization levels")
      ->capture_default_str();
  app->add_option("--qmin", f.qmin, "Clamp floor before quantization")
      ->capture_default_str();
  app->add_option("--qmax", f.qmax, "Clamp ceiling before quantization")
      ->capture_default_str();
}

void add_search_flags(CLI::App* app, SearchFlags& f) {
  app->add_option("--trans-range", f.trans_range,
                  "Translation bound in voxels (one value or x,y,z)")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--trans-step", f.trans_step, "Coarse translation step")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--rot-range", f.rot_range,
                  "Rotation bound in radians (one value or x,y,z)")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--rot-step", f.rot_step, "Coarse rotation step")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--scale-range", f.scale_range,
                  "Uniform scale bound around 1 (0 pins scale)")
      ->capture_default_str();
  app->add_option("--scale-step", f.scale_step, "Coarse scale step")
      ->capture_default_str();
  app->add_option("--refine", f.refine, "Refinement rounds (step halvings)")
      ->capture_default_str();
  app->add_option("--pyramid", f.pyramid, "2x downsampling levels")
      ->capture_default_str();
  app->add_option("--resample-background", f.resample_background,
                  "Fill value for voxels mapped outside the target")
      ->capture_default_str();
  app->add_option("--workers", f.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  add_sim_flags(app, f.sim);
}

std::vector<LesionSpec> parse_lesions(const std::vector<std::string>& specs) {
  std::vector<LesionSpec> out;
  for (const auto& s : specs) {
    LesionSpec l;
    if (std::sscanf(s.c_str(), "%d,%d,%d,%lf,%d", &l.center.x, &l.center.y,
                    &l.center.z, &l.radius, &l.intensity) != 5)
      throw CLI::ValidationError("--lesion", "expects cx,cy,cz,radius,intensity");
    out.push_back(l);
  }
  return out;
}

void print_params(const RigidParams& p) {
  std::printf("tx %.6g\nty %.6g\ntz %.6g\nrx %.6g\nry %.6g\nrz %.6g\nscale %.6g\n",
              p.tx, p.ty, p.tz, p.rx, p.ry, p.rz, p.scale);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial CT registration and change detection"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // --- import-raw -----------------------------------------------------------
  auto* import_cmd =
      app.add_subcommand("import-raw", "Wrap a bare int16 payload into a CTV file");
  std::vector<int> import_dims;
  std::vector<double> import_spacing{1.0};
  std::string import_input, import_output;
  import_cmd->add_option("--dims", import_dims, "Volume dims nx,ny,nz")
      ->delimiter(',')
      ->expected(3)
      ->required();
  import_cmd->add_option("--spacing", import_spacing, "Voxel spacing in mm")
      ->delimiter(',');
  import_cmd->add_option("--input", import_input, "Little-endian int16 payload")
      ->required();
  import_cmd->add_option("--output", import_output, "CTV file to write")->required();

  // --- make-phantom ---------------------------------------------------------
  auto* phantom_cmd =
      app.add_subcommand("make-phantom", "Generate a synthetic test volume");
  std::vector<int> ph_dims{32};
  std::vector<double> ph_spacing{1.0};
  int ph_background = 0;
  std::vector<std::string> ph_lesions;
  int ph_noise = 0;
  unsigned ph_seed = 0;
  std::string ph_output;
  phantom_cmd->add_option("--dims", ph_dims, "Volume dims (one value or nx,ny,nz)")
      ->delimiter(',')
      ->capture_default_str();
  phantom_cmd->add_option("--spacing", ph_spacing, "Voxel spacing in mm")
      ->delimiter(',');
  phantom_cmd->add_option("--background", ph_background, "Background intensity")
      ->capture_default_str();
  phantom_cmd->add_option("--lesion", ph_lesions,
                          "Sphere as cx,cy,cz,radius,intensity (repeatable)");
  phantom_cmd->add_option("--noise", ph_noise, "Uniform jitter amplitude")
      ->capture_default_str();
  phantom_cmd->add_option("--seed", ph_seed, "Noise seed")->capture_default_str();
  phantom_cmd->add_option("--output", ph_output, "CTV file to write")->required();

  // --- similarity -----------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "similarity", "Quantize two volumes and print their patch similarity");
  std::string sim_a, sim_b;
  SimFlags sim_flags;
  QuantFlags sim_quant;
  sim_cmd->add_option("volume_a", sim_a, "Reference CTV volume")->required();
  sim_cmd->add_option("volume_b", sim_b, "Compared CTV volume")->required();
  add_sim_flags(sim_cmd, sim_flags);
  add_quant_flags(sim_cmd, sim_quant);

  // --- register ---------------------------------------------------------------
  auto* reg_cmd = app.add_subcommand(
      "register", "Find the rigid transform maximizing the similarity");
  std::string reg_a, reg_b, reg_trace, reg_resampled;
  SearchFlags reg_flags;
  QuantFlags reg_quant;
  reg_cmd->add_option("source", reg_a, "Reference CTV volume (A)")->required();
  reg_cmd->add_option("target", reg_b, "CTV volume to align (B)")->required();
  reg_cmd->add_option("--trace", reg_trace, "Write one row per evaluation here");
  reg_cmd->add_option("--resampled", reg_resampled,
                      "Write the target resampled at the best transform "
                      "(trilinear) here");
  add_search_flags(reg_cmd, reg_flags);
  add_quant_flags(reg_cmd, reg_quant);

  // --- fuse -------------------------------------------------------------------
  auto* fuse_cmd = app.add_subcommand(
      "fuse", "Subtract two aligned volumes and threshold the change map");
  std::string fuse_a, fuse_b, fuse_outdir;
  int fuse_threshold = 40;
  long long fuse_min_component = 0;
  fuse_cmd->add_option("source", fuse_a, "Reference CTV volume (A)")->required();
  fuse_cmd->add_option("aligned", fuse_b, "Aligned CTV volume (B after registration)")
      ->required();
  fuse_cmd->add_option("--outdir", fuse_outdir,
                       "Directory for mask.ctv, slices.txt, components.txt")
      ->required();
  fuse_cmd->add_option("-t,--threshold", fuse_threshold,
                       "Absolute-difference threshold (strict >)")
      ->capture_default_str();
  fuse_cmd->add_option("--min-component-size", fuse_min_component,
                       "Drop change components smaller than this (0 = keep all)")
      ->capture_default_str();

  // --- pipeline ---------------------------------------------------------------
  auto* pipe_cmd = app.add_subcommand("pipeline", "Catalog-driven comparisons");
  pipe_cmd->require_subcommand(1);

  std::string cat_path, patient, outdir;
  std::string step1_exam;
  std::vector<std::string> step2_exams;
  SearchFlags pipe_flags;
  QuantFlags pipe_quant;
  int pipe_threshold = 40;
  long long pipe_min_component = 0;

  auto add_pipeline_common = [&](CLI::App* cmd) {
    cmd->add_option("--catalog", cat_path, "Exam catalog file")->required();
    cmd->add_option("--patient", patient, "Patient id")->required();
    cmd->add_option("--outdir", outdir, "Output directory (must not exist)")
        ->required();
    cmd->add_option("-t,--threshold", pipe_threshold,
                    "Absolute-difference threshold (strict >)")
        ->capture_default_str();
    cmd->add_option("--min-component-size", pipe_min_component,
                    "Drop change components smaller than this (0 = keep all)")
        ->capture_default_str();
    add_search_flags(cmd, pipe_flags);
    add_quant_flags(cmd, pipe_quant);
  };

  auto* step1_cmd = pipe_cmd->add_subcommand(
      "step1", "Compare a prior (non-stroke) brain CT against the latest "
               "stroke-related one");
  step1_cmd->add_option("--exam", step1_exam, "Prior exam id")->required();
  add_pipeline_common(step1_cmd);

  auto* step2_cmd = pipe_cmd->add_subcommand(
      "step2", "Compare two stroke-related brain CTs (earlier is aligned onto "
               "the later)");
  step2_cmd->add_option("--exams", step2_exams, "The two exam ids")
      ->expected(2)
      ->required();
  add_pipeline_common(step2_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*import_cmd) {
      const auto sp = broadcast3(import_spacing, "--spacing");
      const Volume3D v = import_raw(import_input,
                                    {import_dims[0], import_dims[1], import_dims[2]},
                                    {sp[0], sp[1], sp[2]});
      save_volume(v, import_output);
      std::printf("wrote %s (%dx%dx%d)\n", import_output.c_str(), v.nx(), v.ny(),
                  v.nz());
    } else if (*phantom_cmd) {
      PhantomSpec spec;
      const auto dims = broadcast3(ph_dims, "--dims");
      const auto sp = broadcast3(ph_spacing, "--spacing");
      spec.dims = {dims[0], dims[1], dims[2]};
      spec.spacing = {sp[0], sp[1], sp[2]};
      spec.background = ph_background;
      spec.lesions = parse_lesions(ph_lesions);
      spec.noise_amplitude = ph_noise;
      spec.seed = ph_seed;
      const Volume3D v = generate_phantom(spec);
      save_volume(v, ph_output);
      std::printf("wrote %s (%dx%dx%d)\n", ph_output.c_str(), v.nx(), v.ny(), v.nz());
    } else if (*sim_cmd) {
      const QuantizationSpec q = to_quantization(sim_quant);
      const Volume3D a = quantize(load_volume(sim_a), q);
      const Volume3D b = quantize(load_volume(sim_b), q);
      const SimilarityValue v = patch_similarity_3d(a, b, to_similarity(sim_flags));
      std::printf("normalized %.17g\nraw_average %.17g\nanchors %lld\n",
                  v.normalized, v.raw_average, v.anchors_evaluated);
    } else if (*reg_cmd) {
      const Volume3D a = load_volume(reg_a);
      const Volume3D b = load_volume(reg_b);
      const SearchSpec spec = to_search(reg_flags, reg_quant);
      const RegistrationResult r = register_volumes(a, b, spec, reg_flags.workers);
      print_params(r.best_params);
      std::printf("similarity %.17g\nevaluations %lld\n",
                  r.best_similarity.normalized, r.evaluations);
      if (!reg_trace.empty()) write_trace(r, reg_trace);
      if (!reg_resampled.empty()) {
        const AffineMap map = build_transform(r.best_params, volume_center(b));
        save_volume(resample(b, map, Interpolation::trilinear,
                             reg_flags.resample_background),
                    reg_resampled);
      }
    } else if (*fuse_cmd) {
      const Volume3D a = load_volume(fuse_a);
      const Volume3D b = load_volume(fuse_b);
      ChangeMap m = threshold_change_map(difference(a, b), fuse_threshold);
      if (fuse_min_component > 1) m = filter_min_component_size(m, fuse_min_component);
      namespace fs = std::filesystem;
      fs::create_directories(fuse_outdir);
      const fs::path out(fuse_outdir);
      write_change_report(m, {(out / "mask.ctv").string(),
                              (out / "slices.txt").string(),
                              (out / "components.txt").string()});
      std::printf("changed %lld\ntotal %lld\ncomponents %zu\n", m.changed, m.total,
                  m.components.size());
    } else if (*pipe_cmd) {
      PipelineOptions opt;
      opt.search = to_search(pipe_flags, pipe_quant);
      opt.threshold = pipe_threshold;
      opt.min_component_size = pipe_min_component;
      opt.workers = pipe_flags.workers;
      const Catalog catalog = load_catalog(cat_path);
      RunReport report;
      if (*step1_cmd) {
        report = step1_compare(catalog, patient, step1_exam, opt, outdir);
      } else {
        report = step2_compare(catalog, patient, step2_exams[0], step2_exams[1],
                               opt, outdir);
      }
      std::printf("source %s\ntarget %s\n", report.source_exam_id.c_str(),
                  report.target_exam_id.c_str());
      print_params(report.best_params);
      std::printf("similarity %.17g\nchanged %lld\ncomponents %lld\nreport %s\n",
                  report.best_similarity, report.changed, report.component_count,
                  (std::filesystem::path(outdir) / "report.json").string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
