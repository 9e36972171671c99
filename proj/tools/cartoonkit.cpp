// cartoonkit command line front end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cartoonkit/error.hpp"
#include "cartoonkit/gan.hpp"
#include "cartoonkit/image.hpp"
#include "cartoonkit/image_io.hpp"
#include "cartoonkit/metrics.hpp"
#include "cartoonkit/parallel.hpp"
#include "cartoonkit/pipeline.hpp"
#include "cartoonkit/rng.hpp"
#include "cartoonkit/structure.hpp"
#include "cartoonkit/surface.hpp"
#include "cartoonkit/texture.hpp"

namespace fs = std::filesystem;
using namespace cartoonkit;

namespace {

// Command line flags that map onto config keys. Values are stored as text and
// routed through apply_config_value so a flag and the equivalent config line
// always resolve identically.
struct KeyedFlags {
  std::vector<std::pair<CLI::Option*, std::string>> options;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }

  void apply(PipelineConfig& cfg) const {
    for (const auto& [opt, key] : options) {
      if (opt->count() > 0) apply_config_value(cfg, key, values.at(key));
    }
  }
};

void add_surface_flags(CLI::App* app, KeyedFlags& f) {
  f.add(app, "--radius", "surface.radius", "guided filter radius (default: scaled with image size)");
  f.add(app, "--eps", "surface.eps", "guided filter epsilon");
}

void add_structure_flags(CLI::App* app, KeyedFlags& f) {
  f.add(app, "--superpixel", "structure.superpixel", "felzenszwalb|slic");
  f.add(app, "--k", "structure.k", "Felzenszwalb scale k");
  f.add(app, "--sigma", "structure.sigma", "Felzenszwalb pre-blur sigma");
  f.add(app, "--min-size", "structure.min_size", "Felzenszwalb minimum component size");
  f.add(app, "--regions", "structure.regions", "target region count after merging");
  f.add(app, "--n-segments", "structure.n_segments", "SLIC superpixel count");
  f.add(app, "--compactness", "structure.compactness", "SLIC compactness m");
  f.add(app, "--iters", "structure.iters", "SLIC iterations");
  f.add(app, "--sigma-lo", "structure.sigma_lo", "adaptive coloring lower sigma gate");
  f.add(app, "--sigma-hi", "structure.sigma_hi", "adaptive coloring upper sigma gate");
  f.add(app, "--gamma", "structure.gamma", "adaptive coloring gamma");
}

void add_texture_flags(CLI::App* app, KeyedFlags& f, const std::string& seed_flag) {
  f.add(app, "--alpha", "texture.alpha", "grayscale weight alpha");
  f.add(app, seed_flag, "texture.seed", "seed for the random color-shift betas");
}

void write_text(const fs::path& path, const std::string& s) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_bytes(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

// Random color per label, used for label-map previews.
Image label_visualization(const LabelMap& labels) {
  Image out(labels.height(), labels.width(), 3);
  const CounterRng rng(0x4c4142, 0);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const std::uint64_t h = rng.at(static_cast<std::uint64_t>(labels.at(y, x)));
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = static_cast<float>((h >> (8 * c)) & 0xff) / 255.0f;
      }
    }
  }
  return out;
}

LabelMap final_labels(const Image& img, const StructureParams& p) {
  const LabelMap base = p.method == SuperpixelMethod::kSlic ? slic_superpixels(img, p.slic)
                                                             : felzenszwalb_segment(img, p.felz);
  return merge_regions_selective(base, img, p.target_regions).labels;
}

Image labels_as_image(const LabelMap& labels) {
  Image out(labels.height(), labels.width(), 1);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) out.at(y, x) = static_cast<float>(labels.at(y, x));
  }
  return out;
}

std::vector<std::pair<int, int>> parse_sizes(const std::vector<std::string>& specs) {
  std::vector<std::pair<int, int>> sizes;
  for (const auto& s : specs) {
    const auto x = s.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(s);
      sizes.emplace_back(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "size '" + s + "' is not HxW");
    }
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cartoonkit: surface / structure / texture image representations, toy GAN and FID-RF"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::string config_path;
  app.add_option("--threads", threads, "worker threads (default: CARTOONKIT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--config", config_path, "key = value config file; flags override it")
      ->check(CLI::ExistingFile);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "resize/crop a PNG directory to 256x256");
  std::string ingest_in, ingest_out;
  ingest_cmd->add_option("dir", ingest_in)->required();
  ingest_cmd->add_option("out_dir", ingest_out)->required();

  // surface
  auto* surface_cmd = app.add_subcommand("surface", "guided-filter surface representation");
  KeyedFlags surface_flags;
  std::string surface_in, surface_out, surface_ckf;
  surface_cmd->add_option("input", surface_in)->required();
  surface_cmd->add_option("output", surface_out, "PNG output")->required();
  surface_cmd->add_option("--ckf", surface_ckf, "also write the float map as CKF1");
  add_surface_flags(surface_cmd, surface_flags);

  // structure
  auto* structure_cmd = app.add_subcommand("structure", "segmentation + adaptive coloring");
  KeyedFlags structure_flags;
  std::string structure_in, structure_out, labels_ckf, labels_viz;
  structure_cmd->add_option("input", structure_in)->required();
  structure_cmd->add_option("output", structure_out, "PNG output")->required();
  structure_cmd->add_option("--labels", labels_ckf, "write final label ids as a 1-channel CKF1");
  structure_cmd->add_option("--labels-viz", labels_viz, "write a random-color label PNG");
  add_structure_flags(structure_cmd, structure_flags);

  // texture
  auto* texture_cmd = app.add_subcommand("texture", "random color shift texture map");
  KeyedFlags texture_flags;
  std::string texture_in, texture_out, texture_viz;
  texture_cmd->add_option("input", texture_in)->required();
  texture_cmd->add_option("output", texture_out, "CKF1 output (unclamped)")->required();
  texture_cmd->add_option("--viz", texture_viz, "normalized visualization PNG");
  add_texture_flags(texture_cmd, texture_flags, "--seed");

  // decompose
  auto* decompose_cmd = app.add_subcommand("decompose", "all three representations plus sidecar");
  KeyedFlags decompose_flags;
  std::vector<std::string> decompose_args;
  std::string replay;
  decompose_cmd->add_option("args", decompose_args, "input.png out_dir, or just out_dir with --replay")
      ->required()
      ->expected(1, 2);
  decompose_cmd->add_option("--replay", replay, "re-run from a decompose.json sidecar")
      ->check(CLI::ExistingFile);
  add_surface_flags(decompose_cmd, decompose_flags);
  add_structure_flags(decompose_cmd, decompose_flags);
  add_texture_flags(decompose_cmd, decompose_flags, "--texture-seed");

  // gan-toy
  auto* gan_cmd = app.add_subcommand("gan-toy", "train a 1-D toy GAN");
  gan::TrainConfig train;
  train.batch_size = 64;
  train.steps = 20000;
  std::string data_spec = "gaussian:3,0.5", trace_path, save_g, save_d, gan_report;
  int eval_samples = 10000;
  gan_cmd->add_option("--data", data_spec, "gaussian:m,s | mixture:w,m,s;... | bins:lo,hi:m1,m2,...")
      ->capture_default_str();
  gan_cmd->add_option("--steps", train.steps)->capture_default_str();
  gan_cmd->add_option("--lr", train.learning_rate)->capture_default_str();
  gan_cmd->add_option("--batch", train.batch_size)->capture_default_str();
  gan_cmd->add_option("--d-steps", train.d_steps_per_g_step, "discriminator updates per generator update")
      ->capture_default_str();
  gan_cmd->add_option("--hidden", train.hidden)->capture_default_str();
  gan_cmd->add_option("--depth", train.depth, "hidden layers per network")->capture_default_str();
  gan_cmd->add_option("--eval-samples", eval_samples)->capture_default_str();
  gan_cmd->add_option("--trace", trace_path, "CSV training trace");
  gan_cmd->add_option("--save-g", save_g, "generator weights (CKW1)");
  gan_cmd->add_option("--save-d", save_d, "discriminator weights (CKW1)");
  gan_cmd->add_option("--report", gan_report, "JSON evaluation report");

  // fid
  auto* fid_cmd = app.add_subcommand("fid", "FID-RF between two PNG directories");
  std::string fid_a, fid_b, fid_json, fid_weights;
  fid_cmd->add_option("dir_a", fid_a)->required()->check(CLI::ExistingDirectory);
  fid_cmd->add_option("dir_b", fid_b)->required()->check(CLI::ExistingDirectory);
  fid_cmd->add_option("--json", fid_json, "report path (default: fid.json)");
  fid_cmd->add_option("--weights", fid_weights, "CKW1 feature extractor weights")
      ->check(CLI::ExistingFile);

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "weighted representation loss between two images");
  KeyedFlags loss_flags;
  std::string loss_a, loss_b;
  loss_cmd->add_option("a", loss_a)->required();
  loss_cmd->add_option("b", loss_b)->required();
  loss_flags.add(loss_cmd, "--ls", "loss.surface", "surface weight");
  loss_flags.add(loss_cmd, "--lx", "loss.structure", "structure weight");
  loss_flags.add(loss_cmd, "--lt", "loss.texture", "texture weight");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time every stage on seeded noise images");
  std::vector<std::string> bench_sizes{"256x256"};
  int bench_iters = 5;
  std::string bench_json = "bench.json";
  bench_cmd->add_option("--sizes", bench_sizes, "HxW list; 720x1280 is always added")
      ->capture_default_str();
  bench_cmd->add_option("--iters", bench_iters)->capture_default_str();
  bench_cmd->add_option("--json", bench_json)->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "ingest -> decompose -> optional FID from a config");
  std::string run_path;
  run_cmd->add_option("config", run_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (threads > 0) cfg.threads = threads;
    if (cfg.threads > 0) set_thread_count(cfg.threads);

    if (ingest_cmd->parsed()) {
      const Manifest m = ingest(ingest_in, ingest_out);
      std::printf("ingested %zu image(s), skipped %zu\n", m.entries.size(), m.skipped.size());
      for (const auto& [path, why] : m.skipped) {
        std::fprintf(stderr, "skipped %s: %s\n", path.string().c_str(), why.c_str());
      }
    } else if (surface_cmd->parsed()) {
      surface_flags.apply(cfg);
      cfg.validate();
      const Image img = ensure_rgb(load_png(surface_in));
      const Image s = extract_surface(img, cfg.surface.value_or(default_surface_params(img.height(), img.width())));
      save_png(s, surface_out);
      if (!surface_ckf.empty()) save_ckf(s, surface_ckf);
    } else if (structure_cmd->parsed()) {
      structure_flags.apply(cfg);
      cfg.validate();
      const Image img = ensure_rgb(load_png(structure_in));
      save_png(extract_structure(img, cfg.structure), structure_out);
      if (!labels_ckf.empty() || !labels_viz.empty()) {
        const LabelMap labels = final_labels(img, cfg.structure);
        if (!labels_ckf.empty()) save_ckf(labels_as_image(labels), labels_ckf);
        if (!labels_viz.empty()) save_png(label_visualization(labels), labels_viz);
      }
    } else if (texture_cmd->parsed()) {
      texture_flags.apply(cfg);
      cfg.validate();
      const Image img = ensure_rgb(load_png(texture_in));
      RcsParams p;
      p.alpha = cfg.texture_alpha;
      p.seed = cfg.texture_seed;
      p.betas = sample_betas(cfg.texture_seed);
      const TextureMap tex = random_color_shift(img, p);
      save_ckf(tex.map, texture_out);
      if (!texture_viz.empty()) {
        const VizMapping range = texture_visualization_range(tex);
        save_png(visualize_texture(tex, range), texture_viz);
        std::printf("viz range: lo=%.9g hi=%.9g\n", range.lo, range.hi);
      }
    } else if (decompose_cmd->parsed()) {
      DecomposeFiles files;
      if (!replay.empty()) {
        if (decompose_args.size() != 1) throw Error(ErrorCode::kInvalidArgument, "decompose --replay takes only out_dir");
        files = replay_decompose(replay, decompose_args[0]);
      } else {
        if (decompose_args.size() != 2) throw Error(ErrorCode::kInvalidArgument, "decompose needs input.png and out_dir");
        decompose_flags.apply(cfg);
        cfg.validate();
        files = decompose(decompose_args[0], decompose_args[1], cfg);
      }
      std::printf("wrote %s\n", files.sidecar.string().c_str());
    } else if (gan_cmd->parsed()) {
      const gan::ToyDistribution data = gan::ToyDistribution::parse(data_spec);
      train.seed = cfg.seed;
      const gan::TrainResult r = gan::train_toy_gan(data, train);
      const gan::Evaluation e = gan::evaluate(r, data, eval_samples, train.seed);
      if (!trace_path.empty()) gan::write_trace_csv(r.trace, trace_path);
      if (!save_g.empty()) gan::save_ckw(r.generator, save_g);
      if (!save_d.empty()) gan::save_ckw(r.discriminator, save_d);
      const double final_value = r.trace.empty() ? 0.0 : r.trace.back().value;
      std::printf("generated mean %.6f std %.6f | held-out D accuracy real %.4f fake %.4f | V %.6f\n",
                  e.generated_mean, e.generated_std, e.d_acc_real, e.d_acc_fake, final_value);
      if (!gan_report.empty()) {
        const nlohmann::json j{{"data", data_spec},      {"steps", train.steps},
                               {"lr", train.learning_rate}, {"batch", train.batch_size},
                               {"d_steps", train.d_steps_per_g_step}, {"hidden", train.hidden},
                               {"depth", train.depth},    {"seed", train.seed},
                               {"generated_mean", e.generated_mean},
                               {"generated_std", e.generated_std},
                               {"d_acc_real", e.d_acc_real}, {"d_acc_fake", e.d_acc_fake},
                               {"final_value", final_value}};
        write_text(gan_report, j.dump(2) + "\n");
      }
    } else if (fid_cmd->parsed()) {
      const auto a = load_png_dir(fid_a);
      const auto b = load_png_dir(fid_b);
      FidReport r;
      if (fid_weights.empty()) {
        r = fid_report(a, b, cfg.seed);
      } else {
        const FeatureExtractor fe = FeatureExtractor::from_ckw(fid_weights);
        r = FidReport{a.size(), b.size(), fe.dim(), fid(a, b, fe), cfg.seed};
      }
      std::printf("FID-RF: %.10g\n", r.value);
      write_text(fid_json.empty() ? fs::path("fid.json") : fs::path(fid_json), r.to_json());
    } else if (loss_cmd->parsed()) {
      loss_flags.apply(cfg);
      cfg.validate();
      const Image a = ensure_rgb(load_png(loss_a));
      const Image b = ensure_rgb(load_png(loss_b));
      LossParams lp;
      lp.surface = cfg.surface;
      lp.structure = cfg.structure;
      lp.texture_seed = cfg.texture_seed;
      const double ls = representation_loss(a, b, RepresentationKind::kSurface, lp);
      const double lx = representation_loss(a, b, RepresentationKind::kStructure, lp);
      const double lt = representation_loss(a, b, RepresentationKind::kTexture, lp);
      const double total = cfg.lambdas.surface * ls + cfg.lambdas.structure * lx + cfg.lambdas.texture * lt;
      std::printf("surface %.10g\nstructure %.10g\ntexture %.10g\nweighted %.10g\n", ls, lx, lt, total);
    } else if (bench_cmd->parsed()) {
      const BenchReport r = bench(cfg, parse_sizes(bench_sizes), bench_iters);
      std::fputs(r.table().c_str(), stdout);
      write_text(bench_json, r.to_json());
    } else if (run_cmd->parsed()) {
      PipelineConfig run = load_config(run_path, cfg);
      const RunSummary s = run_config(run);
      std::printf("ingested %zu, skipped %zu, decomposed %zu\n", s.manifest.entries.size(),
                  s.manifest.skipped.size(), s.manifest.entries.size());
      if (s.fid) std::printf("FID-RF: %.10g\n", s.fid->value);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "cartoonkit: [%s] %s\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cartoonkit: %s\n", e.what());
    return 1;
  }
  return 0;
}
