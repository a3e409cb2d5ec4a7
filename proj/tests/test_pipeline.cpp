#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ctreg/phantom.hpp"
#include "ctreg/pipeline.hpp"

using namespace ctreg;

namespace {

namespace fs = std::filesystem;

PipelineOptions fast_options() {
  PipelineOptions opt;
  opt.search.translation_range = {2, 2, 2};
  opt.search.translation_step = {1, 1, 1};
  opt.search.rotation_range = {0, 0, 0};
  opt.search.refinement_levels = 0;
  opt.search.resample_background = 40;  // the fixtures' background
  SimilarityParams sim;
  sim.intervals = {2, 2, 2};
  sim.neighborhood_radius = 0;
  sim.anchor_stride = 2;
  sim.max_patch = 4;
  opt.search.similarity = sim;
  opt.threshold = 50;
  return opt;
}

struct PipelineFixture {
  fs::path dir;
  fs::path catalog_path;

  // Shared anatomy: head ball plus one stable feature; the stroke lesion at
  // (10,7,8) appears only in the stroke exams. The prior exam is the same
  // anatomy shifted +2 in x without the lesion.
  static PhantomSpec anatomy(int shift, bool with_lesion, unsigned seed) {
    PhantomSpec ps;
    ps.dims = {16, 16, 16};
    ps.background = 40;
    ps.seed = seed;
    ps.noise_amplitude = 1;
    ps.lesions = {{{8 + shift, 8, 8}, 6.0, 800}, {{5 + shift, 6, 10}, 2.0, 1300}};
    if (with_lesion) ps.lesions.push_back({{10 + shift, 7, 8}, 2.5, 440});
    return ps;
  }

  PipelineFixture() {
    dir = fs::temp_directory_path() / "ctreg_pipeline_tests";
    fs::remove_all(dir);
    fs::create_directories(dir / "vols");

    save_volume(generate_phantom(anatomy(0, true, 11)),
                (dir / "vols" / "s1.ctv").string());
    save_volume(generate_phantom(anatomy(0, true, 12)),
                (dir / "vols" / "s2.ctv").string());
    save_volume(generate_phantom(anatomy(2, false, 13)),
                (dir / "vols" / "prior.ctv").string());

    catalog_path = dir / "exams.cat";
    std::ofstream f(catalog_path);
    f << "PR|P1|2024-01-10T09:00:00|CT|BRAIN|false|vols/prior.ctv\n"
         "S1|P1|2024-05-01T08:00:00|CT|BRAIN|true|vols/s1.ctv\n"
         "S2|P1|2024-05-03T08:00:00|CT|BRAIN|true|vols/s2.ctv\n"
         "CH|P1|2024-02-01T08:00:00|CT|CHEST|false|vols/prior.ctv\n";
  }

  fs::path out(const char* name) const { return dir / name; }
};

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("step2 on identical exams yields an empty change map") {
  PipelineFixture fx;
  const Catalog cat = load_catalog(fx.catalog_path.string());
  const RunReport report = step2_compare(cat, "P1", "S1", "S2", fast_options(),
                                         fx.out("step2_null").string());

  CHECK(report.source_exam_id == "S2");  // later exam anchors the frame
  CHECK(report.target_exam_id == "S1");
  CHECK(report.changed == 0);
  CHECK(report.component_count == 0);
  CHECK(report.best_similarity == 1.0);

  for (const auto& path : report.outputs) CHECK(fs::exists(path));

  // report.json parses and repeats the change stats
  std::ifstream rf(fx.out("step2_null") / "report.json");
  const nlohmann::json j = nlohmann::json::parse(rf);
  CHECK(j["change"]["changed_voxels"] == 0);
  CHECK(j["source_exam_id"] == "S2");
  CHECK(j["patient_id"] == "P1");
}

TEST_CASE("step2 is invariant under argument order") {
  PipelineFixture fx;
  const Catalog cat = load_catalog(fx.catalog_path.string());
  const RunReport r1 = step2_compare(cat, "P1", "S1", "S2", fast_options(),
                                     fx.out("order_a").string());
  const RunReport r2 = step2_compare(cat, "P1", "S2", "S1", fast_options(),
                                     fx.out("order_b").string());
  CHECK(r1.source_exam_id == r2.source_exam_id);
  CHECK(r1.target_exam_id == r2.target_exam_id);
  CHECK(file_bytes(fx.out("order_a") / "mask.ctv") ==
        file_bytes(fx.out("order_b") / "mask.ctv"));
  CHECK(file_bytes(fx.out("order_a") / "trace.txt") ==
        file_bytes(fx.out("order_b") / "trace.txt"));
}

TEST_CASE("step1 recovers the shift and detects the missing lesion") {
  PipelineFixture fx;
  const Catalog cat = load_catalog(fx.catalog_path.string());
  const RunReport report = step1_compare(cat, "P1", "PR", fast_options(),
                                         fx.out("step1").string());

  CHECK(report.source_exam_id == "S2");  // most recent stroke exam
  CHECK(report.target_exam_id == "PR");
  CHECK(report.best_params.tx == -2.0);  // undoes the prior exam's +2 shift
  REQUIRE(report.component_count >= 1);

  // the change is the stroke lesion ball (contrast 360 >> t)
  const Volume3D mask = load_volume((fx.out("step1") / "mask.ctv").string());
  long long overlap = 0, mask_count = 0, ball = 0;
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const int dx = x - 10, dy = y - 7, dz = z - 8;
        const bool inside = dx * dx + dy * dy + dz * dz < 2.5 * 2.5;
        const bool marked = mask.at(x, y, z) != 0;
        if (inside) ++ball;
        if (marked) ++mask_count;
        if (inside && marked) ++overlap;
      }
  const double dice = 2.0 * overlap / (mask_count + ball);
  CHECK(dice >= 0.7);
  CHECK(report.changed == mask_count);
}

TEST_CASE("step preconditions are enforced") {
  PipelineFixture fx;
  const Catalog cat = load_catalog(fx.catalog_path.string());
  const PipelineOptions opt = fast_options();

  SUBCASE("step1 rejects exams outside the prior filter") {
    CHECK_THROWS_AS(step1_compare(cat, "P1", "S1", opt, fx.out("x1").string()),
                    std::invalid_argument);  // stroke exam is not a prior
    CHECK_THROWS_AS(step1_compare(cat, "P1", "CH", opt, fx.out("x2").string()),
                    std::invalid_argument);  // chest CT filtered out
    CHECK_THROWS_AS(step1_compare(cat, "P1", "NOPE", opt, fx.out("x3").string()),
                    std::invalid_argument);
    CHECK_FALSE(fs::exists(fx.out("x1")));
  }

  SUBCASE("step1 needs a stroke anchor") {
    // catalog with only the prior exam
    std::ofstream f(fx.dir / "noanchor.cat");
    f << "PR|P1|2024-01-10T09:00:00|CT|BRAIN|false|vols/prior.ctv\n";
    f.close();
    const Catalog lone = load_catalog((fx.dir / "noanchor.cat").string());
    CHECK_THROWS_AS(step1_compare(lone, "P1", "PR", opt, fx.out("x4").string()),
                    pipeline_error);
  }

  SUBCASE("step2 rejects the same exam twice and non-stroke exams") {
    CHECK_THROWS_AS(step2_compare(cat, "P1", "S1", "S1", opt, fx.out("x5").string()),
                    std::invalid_argument);
    CHECK_THROWS_AS(step2_compare(cat, "P1", "S1", "PR", opt, fx.out("x6").string()),
                    std::invalid_argument);
  }

  SUBCASE("existing output directory is refused before any work") {
    fs::create_directories(fx.out("taken"));
    CHECK_THROWS_AS(step2_compare(cat, "P1", "S1", "S2", opt, fx.out("taken").string()),
                    pipeline_error);
  }
}

TEST_CASE("outputs appear atomically") {
  PipelineFixture fx;
  const Catalog cat = load_catalog(fx.catalog_path.string());
  const auto outdir = fx.out("atomic");
  step2_compare(cat, "P1", "S1", "S2", fast_options(), outdir.string());

  CHECK(fs::exists(outdir / "registered.ctv"));
  CHECK(fs::exists(outdir / "mask.ctv"));
  CHECK(fs::exists(outdir / "slices.txt"));
  CHECK(fs::exists(outdir / "components.txt"));
  CHECK(fs::exists(outdir / "trace.txt"));
  CHECK(fs::exists(outdir / "report.json"));
  CHECK_FALSE(fs::exists(fx.out("atomic.tmp")));
}

TEST_SUITE_END();
