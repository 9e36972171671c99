#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "cartoonkit/error.hpp"
#include "cartoonkit/image_io.hpp"
#include "cartoonkit/pipeline.hpp"

namespace cartoonkit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw Error(ErrorCode::kConfigError,
              "config key '" + key + "': invalid value '" + value + "' (" + why + ")");
}

double as_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) bad_value(key, value, "expected a number");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "expected a number");
  }
}

long long as_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value, "expected an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "expected an integer");
  }
}

GuidedFilterParams& surface_of(PipelineConfig& cfg) {
  if (!cfg.surface) cfg.surface = GuidedFilterParams{};
  return *cfg.surface;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input", [](auto& c, auto&, auto& v) { c.input = v; }},
      {"output", [](auto& c, auto&, auto& v) { c.output = v; }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = static_cast<int>(as_integer(k, v)); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(as_integer(k, v)); }},
      {"surface.radius", [](auto& c, auto& k, auto& v) { surface_of(c).radius = static_cast<int>(as_integer(k, v)); }},
      {"surface.eps", [](auto& c, auto& k, auto& v) { surface_of(c).epsilon = static_cast<float>(as_double(k, v)); }},
      {"structure.superpixel", [](auto& c, auto& k, auto& v) {
         try {
           c.structure.method = parse_superpixel_method(v);
         } catch (const Error&) {
           bad_value(k, v, "felzenszwalb|slic");
         }
       }},
      {"structure.k", [](auto& c, auto& k, auto& v) { c.structure.felz.k = as_double(k, v); }},
      {"structure.sigma", [](auto& c, auto& k, auto& v) { c.structure.felz.sigma = as_double(k, v); }},
      {"structure.min_size", [](auto& c, auto& k, auto& v) { c.structure.felz.min_size = static_cast<int>(as_integer(k, v)); }},
      {"structure.regions", [](auto& c, auto& k, auto& v) { c.structure.target_regions = static_cast<int>(as_integer(k, v)); }},
      {"structure.n_segments", [](auto& c, auto& k, auto& v) { c.structure.slic.n_segments = static_cast<int>(as_integer(k, v)); }},
      {"structure.compactness", [](auto& c, auto& k, auto& v) { c.structure.slic.compactness = as_double(k, v); }},
      {"structure.iters", [](auto& c, auto& k, auto& v) { c.structure.slic.iters = static_cast<int>(as_integer(k, v)); }},
      {"structure.sigma_lo", [](auto& c, auto& k, auto& v) { c.structure.color.sigma_lo = as_double(k, v); }},
      {"structure.sigma_hi", [](auto& c, auto& k, auto& v) { c.structure.color.sigma_hi = as_double(k, v); }},
      {"structure.gamma", [](auto& c, auto& k, auto& v) { c.structure.color.gamma = as_double(k, v); }},
      {"texture.alpha", [](auto& c, auto& k, auto& v) { c.texture_alpha = as_double(k, v); }},
      {"texture.seed", [](auto& c, auto& k, auto& v) { c.texture_seed = static_cast<std::uint64_t>(as_integer(k, v)); }},
      {"loss.surface", [](auto& c, auto& k, auto& v) { c.lambdas.surface = as_double(k, v); }},
      {"loss.structure", [](auto& c, auto& k, auto& v) { c.lambdas.structure = as_double(k, v); }},
      {"loss.texture", [](auto& c, auto& k, auto& v) { c.lambdas.texture = as_double(k, v); }},
      {"fid.a", [](auto& c, auto&, auto& v) { c.fid_a = v; }},
      {"fid.b", [](auto& c, auto&, auto& v) { c.fid_b = v; }},
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    if (surface) surface->validate();
    structure.validate();
    if (!(texture_alpha >= 0.0 && texture_alpha <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "texture.alpha must lie in [0,1]");
    }
    if (lambdas.surface < 0.0 || lambdas.structure < 0.0 || lambdas.texture < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
    }
    if (threads < 0) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 0");
    if (fid_a.empty() != fid_b.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "fid.a and fid.b must be given together");
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, std::string("invalid config: ") + e.what());
  }
}

void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'");
  }
  it->second(cfg, key, value);
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "config line " + std::to_string(number) + ": expected 'key = value'");
    }
    apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  const auto bytes = read_file_bytes(path);
  return parse_config(std::string(bytes.begin(), bytes.end()), std::move(base));
}

}  // namespace cartoonkit
