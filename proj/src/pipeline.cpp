#include "cartoonkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"

#include "cartoonkit/error.hpp"
#include "cartoonkit/image_io.hpp"
#include "cartoonkit/kernels.hpp"
#include "cartoonkit/parallel.hpp"
#include "cartoonkit/rng.hpp"

namespace cartoonkit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool has_png_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kFileNotFound, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_png_extension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

template <class F>
auto run_stage(int index, const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + std::to_string(index) + " (" + name + "): " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIoError,
                "stage " + std::to_string(index) + " (" + name + "): " + e.what());
  }
}

json structure_json(const StructureParams& s) {
  return {{"superpixel", to_string(s.method)},
          {"k", s.felz.k},
          {"sigma", s.felz.sigma},
          {"min_size", s.felz.min_size},
          {"regions", s.target_regions},
          {"n_segments", s.slic.n_segments},
          {"compactness", s.slic.compactness},
          {"iters", s.slic.iters},
          {"sigma_lo", s.color.sigma_lo},
          {"sigma_hi", s.color.sigma_hi},
          {"gamma", s.color.gamma}};
}

StructureParams structure_from_json(const json& j) {
  StructureParams s;
  s.method = parse_superpixel_method(j.at("superpixel").get<std::string>());
  s.felz.k = j.at("k").get<double>();
  s.felz.sigma = j.at("sigma").get<double>();
  s.felz.min_size = j.at("min_size").get<int>();
  s.target_regions = j.at("regions").get<int>();
  s.slic.n_segments = j.at("n_segments").get<int>();
  s.slic.compactness = j.at("compactness").get<double>();
  s.slic.iters = j.at("iters").get<int>();
  s.color.sigma_lo = j.at("sigma_lo").get<double>();
  s.color.sigma_hi = j.at("sigma_hi").get<double>();
  s.color.gamma = j.at("gamma").get<double>();
  return s;
}

Image noise_image(int h, int w, std::uint64_t seed) {
  CounterRng rng(seed, (static_cast<std::uint64_t>(h) << 32) | static_cast<std::uint64_t>(w));
  Image img(h, w, 3);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

template <class F>
std::vector<double> time_runs(int iters, F&& fn) {
  fn();  // warm-up, discarded
  std::vector<double> ms;
  for (int i = 0; i < iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::max(1e-6, std::chrono::duration<double, std::milli>(t1 - t0).count()));
  }
  return ms;
}

std::string machine_descriptor() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        const auto b = line.find_first_not_of(' ', colon + 1);
        return b == std::string::npos ? "unknown cpu" : line.substr(b);
      }
    }
  }
  return "unknown cpu";
}

}  // namespace

Image ensure_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.height(), img.width(), 3);
  for (int c = 0; c < 3; ++c) insert_channel(out, img, c);
  return out;
}

std::vector<Image> load_png_dir(const fs::path& dir) {
  std::vector<Image> images;
  for (const auto& p : png_files(dir)) images.push_back(ensure_rgb(load_png(p)));
  return images;
}

std::string Manifest::to_json() const {
  json j;
  j["entries"] = json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"source", e.source.string()},
                            {"output", e.output.string()},
                            {"original_height", e.height},
                            {"original_width", e.width}});
  }
  j["skipped"] = json::array();
  for (const auto& [path, reason] : skipped) {
    j["skipped"].push_back({{"source", path.string()}, {"reason", reason}});
  }
  return j.dump(2) + "\n";
}

Manifest ingest(const fs::path& dir, const fs::path& out_dir) {
  const auto files = png_files(dir);
  if (files.empty()) throw Error(ErrorCode::kInvalidArgument, "no PNG files in " + dir.string());
  fs::create_directories(out_dir);

  struct Outcome {
    std::optional<ManifestEntry> entry;
    std::string error;
  };
  std::vector<Outcome> outcomes(files.size());
  parallel_for(0, files.size(), [&](std::size_t i) {
    try {
      const Image src = load_png(files[i]);
      const fs::path out = out_dir / (files[i].stem().string() + ".png");
      save_png(resize_crop_256(src), out);
      outcomes[i].entry = ManifestEntry{files[i], out, src.height(), src.width()};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIoError) throw;
      outcomes[i].error = e.what();
    }
  });

  Manifest m;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (outcomes[i].entry) {
      m.entries.push_back(*outcomes[i].entry);
    } else {
      m.skipped.emplace_back(files[i], outcomes[i].error);
    }
  }
  write_text(out_dir / "manifest.json", m.to_json());
  return m;
}

Decomposition decompose_image(const Image& input, const PipelineConfig& cfg) {
  cfg.validate();
  const Image img = ensure_rgb(input);
  Decomposition d;
  d.surface_params = cfg.surface.value_or(default_surface_params(img.height(), img.width()));
  d.surface = run_stage(1, "surface", [&] { return extract_surface(img, d.surface_params); });
  d.structure = run_stage(2, "structure", [&] { return extract_structure(img, cfg.structure); });
  d.texture = run_stage(3, "texture", [&] {
    RcsParams p;
    p.alpha = cfg.texture_alpha;
    p.betas = sample_betas(cfg.texture_seed);
    p.seed = cfg.texture_seed;
    return random_color_shift(img, p);
  });
  d.texture_viz = texture_visualization_range(d.texture);
  return d;
}

std::string decompose_sidecar(const fs::path& img_path, const Decomposition& d,
                              const PipelineConfig& cfg) {
  const auto betas = sample_betas(cfg.texture_seed);
  json j;
  j["input"] = img_path.string();
  j["input_size"] = {d.surface.height(), d.surface.width()};
  j["surface"] = {{"radius", d.surface_params.radius},
                  {"eps", static_cast<double>(d.surface_params.epsilon)}};
  j["structure"] = structure_json(cfg.structure);
  j["texture"] = {{"alpha", cfg.texture_alpha},
                  {"seed", cfg.texture_seed},
                  {"betas", {betas[0], betas[1], betas[2]}}};
  j["texture_viz"] = {{"lo", d.texture_viz.lo}, {"hi", d.texture_viz.hi}};
  j["outputs"] = {{"surface", "surface.png"},
                  {"structure", "structure.png"},
                  {"texture", "texture.ckf"},
                  {"texture_viz", "texture_viz.png"},
                  {"texture_viz_range", "texture_viz.txt"}};
  return j.dump(2) + "\n";
}

DecomposeFiles decompose(const fs::path& img_path, const fs::path& out_dir,
                         const PipelineConfig& cfg) {
  const Image img = run_stage(0, "load", [&] { return load_png(img_path); });
  const Decomposition d = decompose_image(img, cfg);
  return run_stage(4, "write", [&] {
    fs::create_directories(out_dir);
    DecomposeFiles f{out_dir / "surface.png",     out_dir / "structure.png",
                     out_dir / "texture.ckf",     out_dir / "texture_viz.png",
                     out_dir / "texture_viz.txt", out_dir / "decompose.json"};
    save_png(d.surface, f.surface);
    save_png(d.structure, f.structure);
    save_ckf(d.texture.map, f.texture);
    save_png(visualize_texture(d.texture, d.texture_viz), f.texture_viz);
    char range[160];
    std::snprintf(range, sizeof range, "lo = %.9g\nhi = %.9g\nmapping = (v - lo) / (hi - lo)\n",
                  d.texture_viz.lo, d.texture_viz.hi);
    write_text(f.texture_viz_range, range);
    write_text(f.sidecar, decompose_sidecar(img_path, d, cfg));
    return f;
  });
}

DecomposeFiles replay_decompose(const fs::path& sidecar, const fs::path& out_dir) {
  const auto bytes = read_file_bytes(sidecar);
  PipelineConfig cfg;
  fs::path input;
  try {
    const json j = json::parse(bytes.begin(), bytes.end());
    input = j.at("input").get<std::string>();
    cfg.surface = GuidedFilterParams{j.at("surface").at("radius").get<int>(),
                                     static_cast<float>(j.at("surface").at("eps").get<double>())};
    cfg.structure = structure_from_json(j.at("structure"));
    cfg.texture_alpha = j.at("texture").at("alpha").get<double>();
    cfg.texture_seed = j.at("texture").at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, sidecar.string() + ": malformed sidecar: " + e.what());
  }
  return decompose(input, out_dir, cfg);
}

std::string BenchReport::to_json() const {
  json j;
  j["machine"] = machine;
  j["kernel_isa"] = kernel_isa;
  j["threads"] = threads;
  j["reference_claim"] = reference_claim;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"stage", r.stage},
                         {"height", r.height},
                         {"width", r.width},
                         {"iterations", r.iterations},
                         {"p50_ms", r.p50_ms},
                         {"p90_ms", r.p90_ms},
                         {"megapixels_per_s", r.megapixels_per_s}});
  }
  return j.dump(2) + "\n";
}

std::string BenchReport::table() const {
  std::string out = "# " + reference_claim + "\n# machine: " + machine + " | kernels: " +
                    kernel_isa + " | threads: " + std::to_string(threads) + "\n";
  char line[200];
  std::snprintf(line, sizeof line, "%-10s %10s %6s %10s %10s %10s\n", "stage", "size", "iters",
                "p50_ms", "p90_ms", "MP/s");
  out += line;
  for (const auto& r : rows) {
    const std::string size = std::to_string(r.height) + "x" + std::to_string(r.width);
    std::snprintf(line, sizeof line, "%-10s %10s %6d %10.3f %10.3f %10.2f\n", r.stage.c_str(),
                  size.c_str(), r.iterations, r.p50_ms, r.p90_ms, r.megapixels_per_s);
    out += line;
  }
  return out;
}

BenchReport bench(const PipelineConfig& cfg, std::vector<std::pair<int, int>> sizes, int iters) {
  if (iters < 3) throw Error(ErrorCode::kInvalidArgument, "bench needs iters >= 3");
  cfg.validate();
  if (std::find(sizes.begin(), sizes.end(), kBenchReferenceSize) == sizes.end()) {
    sizes.push_back(kBenchReferenceSize);
  }
  BenchReport report;
  report.machine = machine_descriptor();
  report.kernel_isa = std::string(kernels::active().name);
  report.threads = thread_count();
  report.reference_claim =
      "external reference figure: 720x1280 in 17.23 ms on an unspecified GPU "
      "(context only, not a target of this CPU harness)";

  for (const auto& [h, w] : sizes) {
    if (h < 1 || w < 1) throw Error(ErrorCode::kInvalidArgument, "bench sizes must be positive");
    const Image img = noise_image(h, w, cfg.seed);
    const GuidedFilterParams sp = cfg.surface.value_or(default_surface_params(h, w));
    RcsParams rp;
    rp.alpha = cfg.texture_alpha;
    rp.betas = sample_betas(cfg.texture_seed);
    const std::vector<std::pair<std::string, std::function<void()>>> stages = {
        {"surface", [&] { (void)extract_surface(img, sp); }},
        {"structure", [&] { (void)extract_structure(img, cfg.structure); }},
        {"texture", [&] { (void)random_color_shift(img, rp); }},
        {"decompose", [&] { (void)decompose_image(img, cfg); }},
    };
    for (const auto& [name, fn] : stages) {
      const auto ms = time_runs(iters, fn);
      BenchRow row;
      row.stage = name;
      row.height = h;
      row.width = w;
      row.iterations = iters;
      row.p50_ms = percentile(ms, 0.5);
      row.p90_ms = percentile(ms, 0.9);
      row.megapixels_per_s = (static_cast<double>(h) * w / 1e6) / (row.p50_ms / 1e3);
      report.rows.push_back(row);
    }
  }
  return report;
}

double time_guided_filter(int height, int width, int iters) {
  const Image img = noise_image(height, width, 1);
  const GuidedFilterParams p{5, 2e-2f};
  return percentile(time_runs(iters, [&] { (void)extract_surface(img, p); }), 0.5);
}

std::string FidReport::to_json() const {
  json j{{"metric", "FID-RF"}, {"n_a", n_a}, {"n_b", n_b}, {"dim", dim}, {"value", value}, {"seed", seed}};
  return j.dump(2) + "\n";
}

FidReport fid_report(const std::vector<Image>& a, const std::vector<Image>& b, std::uint64_t seed) {
  const FeatureExtractor fe(seed);
  FidReport r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.dim = fe.dim();
  r.seed = seed;
  r.value = fid(a, b, fe);
  return r;
}

RunSummary run_config(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.input.empty() || cfg.output.empty()) {
    throw Error(ErrorCode::kConfigError, "config needs both 'input' and 'output'");
  }
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  RunSummary summary;
  const fs::path ingested = cfg.output / "ingested";
  const fs::path decomposed = cfg.output / "decomposed";
  summary.manifest = ingest(cfg.input, ingested);
  const auto& entries = summary.manifest.entries;
  parallel_for(0, entries.size(), [&](std::size_t i) {
    decompose(entries[i].output, decomposed / entries[i].output.stem(), cfg);
  });

  if (!cfg.fid_a.empty()) {
    auto load_set = [&](const std::string& name) {
      if (name == "input") return load_png_dir(ingested);
      if (name == "surface" || name == "structure") {
        std::vector<Image> set;
        for (const auto& e : entries) {
          set.push_back(ensure_rgb(load_png(decomposed / e.output.stem() / (name + ".png"))));
        }
        return set;
      }
      return load_png_dir(name);
    };
    summary.fid = fid_report(load_set(cfg.fid_a), load_set(cfg.fid_b), cfg.seed);
    write_text(cfg.output / "fid.json", summary.fid->to_json());
  }
  return summary;
}

}  // namespace cartoonkit
