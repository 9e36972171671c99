#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartoonkit/image.hpp"
#include "cartoonkit/metrics.hpp"
#include "cartoonkit/structure.hpp"
#include "cartoonkit/surface.hpp"
#include "cartoonkit/texture.hpp"

namespace cartoonkit {

/// Everything a pipeline run depends on. Flat `key = value` files map onto
/// these fields one-to-one (see docs/config.md).
struct PipelineConfig {
  /// Unset: the size-scaled default (r=5, eps=2e-2 at 256x256).
  std::optional<GuidedFilterParams> surface;
  StructureParams structure;
  double texture_alpha = kTextureAlpha;
  std::uint64_t texture_seed = 0;
  StyleWeights lambdas;

  std::filesystem::path input;
  std::filesystem::path output;
  /// 0 keeps the process default.
  int threads = 0;
  std::uint64_t seed = 42;
  /// Sets compared by `run`: "input", "surface", "structure" or a directory.
  std::string fid_a;
  std::string fid_b;

  void validate() const;
};

/// Applies one `key = value` assignment; throws Error(kConfigError) naming the
/// key if it is unknown or its value does not parse.
void apply_config_value(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);
PipelineConfig parse_config(const std::string& text,
                            PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path,
                           PipelineConfig base = {});

struct ManifestEntry {
  std::filesystem::path source;
  std::filesystem::path output;
  int height = 0;
  int width = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::pair<std::filesystem::path, std::string>> skipped;

  std::string to_json() const;
};

/// Resizes/crops every *.png in `dir` (sorted by name) to 256x256 into
/// `out_dir` and writes out_dir/manifest.json. Undecodable files are listed
/// as skipped. Throws when the directory holds no PNG files.
Manifest ingest(const std::filesystem::path& dir,
                const std::filesystem::path& out_dir);

struct Decomposition {
  GuidedFilterParams surface_params;
  Image surface;
  Image structure;
  TextureMap texture;
  VizMapping texture_viz;
};

Decomposition decompose_image(const Image& img, const PipelineConfig& cfg);

struct DecomposeFiles {
  std::filesystem::path surface;
  std::filesystem::path structure;
  std::filesystem::path texture;
  std::filesystem::path texture_viz;
  std::filesystem::path texture_viz_range;
  std::filesystem::path sidecar;
};

/// Writes surface.png, structure.png, texture.ckf, texture_viz.png (+ its
/// range in texture_viz.txt) and decompose.json into out_dir. Failures are
/// rethrown with the stage index and name prefixed.
DecomposeFiles decompose(const std::filesystem::path& img_path,
                         const std::filesystem::path& out_dir,
                         const PipelineConfig& cfg);

/// JSON recording every parameter decompose used; enough to replay it.
std::string decompose_sidecar(const std::filesystem::path& img_path,
                              const Decomposition& d, const PipelineConfig& cfg);
/// Re-runs decompose from a sidecar written by an earlier run.
DecomposeFiles replay_decompose(const std::filesystem::path& sidecar,
                                const std::filesystem::path& out_dir);

struct BenchRow {
  std::string stage;
  int height = 0;
  int width = 0;
  int iterations = 0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double megapixels_per_s = 0.0;
};

struct BenchReport {
  std::string machine;
  std::string kernel_isa;
  int threads = 1;
  std::string reference_claim;
  std::vector<BenchRow> rows;

  std::string to_json() const;
  std::string table() const;
};

inline constexpr std::pair<int, int> kBenchReferenceSize{720, 1280};

/// Times surface, structure, texture and the full decomposition on seeded
/// noise images. 720x1280 is always added to `sizes`. One warm-up run per
/// row is discarded. Requires iters >= 3.
BenchReport bench(const PipelineConfig& cfg,
                  std::vector<std::pair<int, int>> sizes, int iters);

/// Median wall time in ms of `iters` guided filter runs at the given size.
double time_guided_filter(int height, int width, int iters);

/// FID between the random-feature embeddings of two image sets ("FID-RF";
/// not comparable with Inception-based FID numbers).
struct FidReport {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  int dim = 0;
  double value = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};
FidReport fid_report(const std::vector<Image>& a, const std::vector<Image>& b,
                     std::uint64_t seed);

struct RunSummary {
  Manifest manifest;
  std::optional<FidReport> fid;
};

/// ingest -> decompose each ingested image -> optional FID, per the config.
RunSummary run_config(const PipelineConfig& cfg);

/// Reads all *.png files of a directory in name order (3-channel; gray
/// images are replicated). Undecodable files are an error here.
std::vector<Image> load_png_dir(const std::filesystem::path& dir);

/// Gray images become 3 identical channels; RGB passes through.
Image ensure_rgb(const Image& img);

}  // namespace cartoonkit
