#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

#include "json.hpp"

#include "cartoonkit/error.hpp"
#include "cartoonkit/image_io.hpp"
#include "cartoonkit/parallel.hpp"
#include "cartoonkit/pipeline.hpp"
#include "fixtures.hpp"

using namespace cartoonkit;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

// PNGs are hashed by decoded 8-bit samples so the digest does not depend on
// the zlib build; everything else by raw bytes.
std::uint64_t content_hash(const fs::path& p) {
  if (p.extension() != ".png") return fnv1a(read_file_bytes(p));
  const Image img = load_png(p);
  std::vector<std::uint8_t> q;
  q.push_back(static_cast<std::uint8_t>(img.channels()));
  for (float v : img.data()) q.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
  return fnv1a(q);
}

std::map<std::string, std::vector<std::uint8_t>> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().filename().string()] = read_file_bytes(e.path());
  return out;
}

std::string slurp(const fs::path& p) {
  const auto b = read_file_bytes(p);
  return {b.begin(), b.end()};
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" CARTOONKIT_CLI "\" " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

fs::path golden_input(const fs::path& dir) {
  const fs::path p = dir / "fixture.png";
  save_png(fixtures::photo(96, 128, 1), p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig c = parse_config(
      "# comment\n"
      "input = in\n"
      "output = out  # trailing\n"
      "surface.radius = 3\n"
      "surface.eps = 0.05\n"
      "structure.superpixel = slic\n"
      "structure.regions = 20\n"
      "texture.seed = 9\n"
      "loss.texture = 0.5\n");
  CHECK(c.input == "in");
  CHECK(c.output == "out");
  REQUIRE(c.surface.has_value());
  CHECK(c.surface->radius == 3);
  CHECK(c.surface->epsilon == 0.05f);
  CHECK(c.structure.method == SuperpixelMethod::kSlic);
  CHECK(c.structure.target_regions == 20);
  CHECK(c.texture_seed == 9);
  CHECK(c.lambdas.texture == 0.5);

  const PipelineConfig d = parse_config("");
  CHECK_FALSE(d.surface.has_value());
  CHECK(d.structure.target_regions == 50);
  CHECK(d.texture_alpha == 0.8);
}

TEST_CASE("config errors name the key") {
  for (const char* text : {"alpa = 0.8\n", "texture.alpa = 0.8\n"}) {
    try {
      (void)parse_config(text);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfigError);
      CHECK(std::string(e.what()).find("alpa") != std::string::npos);
    }
  }
  try {
    (void)parse_config("structure.k = many\n");
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("structure.k") != std::string::npos);
  }
  CHECK_THROWS_AS((void)parse_config("texture.alpha = 2\n"), Error);
  CHECK_THROWS_AS((void)parse_config("just words\n"), Error);
  CHECK_THROWS_AS((void)parse_config("fid.a = input\n"), Error);
}

TEST_CASE("ingest: resize, skip corrupt files, idempotence") {
  const fs::path dir = fixtures::scratch_dir("ingest_in");
  const fs::path out = fixtures::scratch_dir("ingest_out");
  const fs::path again = fixtures::scratch_dir("ingest_again");
  for (int i = 0; i < 3; ++i) save_png(fixtures::photo(512, 512, 40 + i), dir / ("img" + std::to_string(i) + ".png"));
  {
    std::ofstream bad(dir / "broken.png");
    bad << "not a png";
  }
  const Manifest m = ingest(dir, out);
  CHECK(m.entries.size() == 3);
  REQUIRE(m.skipped.size() == 1);
  CHECK(m.skipped[0].first.filename() == "broken.png");
  for (const auto& e : m.entries) {
    CHECK(e.height == 512);
    CHECK(e.width == 512);
    const Image img = load_png(e.output);
    CHECK(img.height() == 256);
    CHECK(img.width() == 256);
  }
  const json j = json::parse(slurp(out / "manifest.json"));
  CHECK(j["entries"].size() == 3);
  CHECK(j["skipped"].size() == 1);

  CHECK(cli("ingest \"" + dir.string() + "\" \"" + (again / "cli").string() + "\"") == 0);

  const Manifest m2 = ingest(out, again);
  CHECK(m2.entries.size() == 3);
  for (const auto& e : m.entries) CHECK(read_file_bytes(e.output) == read_file_bytes(again / e.output.filename()));

  CHECK_THROWS_AS((void)ingest(fixtures::scratch_dir("ingest_empty"), again), Error);
  CHECK_THROWS_AS((void)ingest(dir / "missing", again), Error);
}

TEST_CASE("decompose of a constant image") {
  PipelineConfig cfg;
  cfg.texture_seed = 4;
  const Image img(40, 40, 3, 0.35f);
  const Decomposition d = decompose_image(img, cfg);
  CHECK(d.surface == img);
  for (float v : d.structure.data()) CHECK(v == doctest::Approx(0.35f).epsilon(1e-6));
  const auto b = sample_betas(4);
  const double scale = 0.2 * (b[0] + b[1] + b[2]) + 0.8;
  const float y = to_grayscale(img).at(0, 0);
  for (float v : d.texture.map.data()) CHECK(v == doctest::Approx(scale * y).epsilon(1e-6));
}

TEST_CASE("decompose: golden snapshot, thread counts, replay") {
  const fs::path work = fixtures::scratch_dir("golden");
  const fs::path input = golden_input(work);
  PipelineConfig cfg;
  const int saved = thread_count();
  set_thread_count(1);
  const DecomposeFiles f1 = decompose(input, work / "t1", cfg);
  set_thread_count(4);
  (void)decompose(input, work / "t4", cfg);
  set_thread_count(saved);
  const auto b1 = dir_bytes(work / "t1");
  CHECK(b1.size() == 6);
  CHECK(b1 == dir_bytes(work / "t4"));

  std::ostringstream digest;
  for (const char* name : {"surface.png", "structure.png", "texture.ckf", "texture_viz.png", "texture_viz.txt"}) {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(content_hash(work / "t1" / name)));
    digest << name << ' ' << hex << '\n';
  }
  const fs::path golden = fs::path(CARTOONKIT_GOLDEN_DIR) / "decompose.txt";
  if (std::getenv("CARTOONKIT_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(golden) << digest.str();
  }
  REQUIRE(fs::exists(golden));
  CHECK(slurp(golden) == digest.str());

  const DecomposeFiles r = replay_decompose(f1.sidecar, work / "replay");
  (void)r;
  CHECK(dir_bytes(work / "replay") == b1);

  {
    std::ofstream bad(work / "bad.json");
    bad << "{\"input\": 3}";
  }
  CHECK_THROWS_AS((void)replay_decompose(work / "bad.json", work / "replay2"), Error);
}

TEST_CASE("decompose: a missing input is a stage-0 error") {
  const fs::path work = fixtures::scratch_dir("missing");
  try {
    (void)decompose(work / "nope.png", work / "out", PipelineConfig{});
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("stage 0", 0) == 0);
  }
  CHECK(cli("decompose \"" + (work / "nope.png").string() + "\" \"" + (work / "out").string() + "\"") != 0);
}

TEST_CASE("CLI: flags, config file and thread counts give identical bytes") {
  const fs::path work = fixtures::scratch_dir("cli_eq");
  const fs::path input = work / "in.png";
  save_png(fixtures::photo(80, 100, 6), input);
  {
    std::ofstream cfg(work / "c.cfg");
    cfg << "surface.radius = 3\nsurface.eps = 0.01\nstructure.k = 250\nstructure.regions = 30\n"
           "texture.seed = 12\n";
  }
  const std::string in = "\"" + input.string() + "\" ";
  REQUIRE(cli("decompose " + in + "\"" + (work / "flags").string() +
              "\" --radius 3 --eps 0.01 --k 250 --regions 30 --texture-seed 12") == 0);
  REQUIRE(cli("--config \"" + (work / "c.cfg").string() + "\" decompose " + in + "\"" + (work / "config").string() + "\"") == 0);
  REQUIRE(cli("--threads 1 decompose " + in + "\"" + (work / "one").string() + "\"") == 0);
  REQUIRE(cli("decompose " + in + "\"" + (work / "env").string() + "\"", "CARTOONKIT_THREADS=3") == 0);
  CHECK(dir_bytes(work / "flags") == dir_bytes(work / "config"));
  CHECK(dir_bytes(work / "one") == dir_bytes(work / "env"));
  CHECK(dir_bytes(work / "flags") != dir_bytes(work / "one"));
  CHECK(cli("--config \"" + (work / "missing.cfg").string() + "\" decompose " + in + "\"" + (work / "x").string() + "\"") != 0);
}

TEST_CASE("run: minimal config with defaults and FID") {
  const fs::path in = fixtures::scratch_dir("run_in");
  const fs::path out = fixtures::scratch_dir("run_out");
  for (int i = 0; i < 3; ++i) save_png(fixtures::photo(64, 80, 60 + i), in / ("p" + std::to_string(i) + ".png"));
  PipelineConfig cfg = parse_config("input = " + in.string() + "\noutput = " + out.string() + "\n");
  const RunSummary s = run_config(cfg);
  CHECK(s.manifest.entries.size() == 3);
  CHECK_FALSE(s.fid.has_value());
  for (int i = 0; i < 3; ++i)
    for (const char* f : {"surface.png", "structure.png", "texture.ckf", "texture_viz.png", "decompose.json"})
      CHECK(fs::exists(out / "decomposed" / ("p" + std::to_string(i)) / f));

  cfg.fid_a = "input";
  cfg.fid_b = "structure";
  const RunSummary s2 = run_config(cfg);
  REQUIRE(s2.fid.has_value());
  CHECK(s2.fid->value > 0.0);
  const json j = json::parse(slurp(out / "fid.json"));
  CHECK(j["metric"] == "FID-RF");
  CHECK(j["n_a"] == 3);

  PipelineConfig no_output;
  no_output.input = in;
  CHECK_THROWS_AS((void)run_config(no_output), Error);
}

TEST_CASE("bench report") {
  const BenchReport r = bench(PipelineConfig{}, {{64, 64}}, 3);
  CHECK(r.reference_claim.find("17.23 ms") != std::string::npos);
  for (const char* stage : {"surface", "structure", "texture", "decompose"}) {
    bool small = false, reference = false;
    for (const BenchRow& row : r.rows) {
      if (row.stage != stage) continue;
      small = small || (row.height == 64 && row.width == 64);
      reference = reference || (row.height == 720 && row.width == 1280);
    }
    CHECK(small);
    CHECK(reference);
  }
  for (const BenchRow& row : r.rows) {
    CHECK(row.p50_ms <= row.p90_ms);
    CHECK(row.p50_ms > 0.0);
    CHECK(row.iterations == 3);
  }
  const json j = json::parse(r.to_json());
  CHECK(j["rows"].size() == r.rows.size());
  CHECK(r.table().find("720x1280") != std::string::npos);
  CHECK_THROWS_AS((void)bench(PipelineConfig{}, {}, 2), Error);
}

TEST_CASE("guided filter time grows near-linearly in pixel count") {
  const double base = time_guided_filter(512, 512, 7);
  const double doubled = time_guided_filter(512, 1024, 7);
  const double ratio = doubled / base;
  CAPTURE(base);
  CAPTURE(doubled);
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 3.5);
}
