#include "cartoonkit/gan.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "cartoonkit/error.hpp"
#include "cartoonkit/image_io.hpp"

namespace cartoonkit::gan {
namespace {

constexpr std::array<char, 4> kCkwMagic{'C', 'K', 'W', '1'};

// Post-activation values of every layer; activations[0] is the input.
struct Tape {
  std::vector<Vector> activations;
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vector forward_tape(const Mlp& net, const Vector& x, Tape& tape) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mlp input has " + std::to_string(x.size()) + " values, expected " +
                    std::to_string(net.input_dim()));
  }
  tape.activations.assign(1, x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    const Vector& in = tape.activations.back();
    Vector out(static_cast<std::size_t>(layer.out));
    const bool last = l + 1 == net.layers.size();
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.biases[static_cast<std::size_t>(o)];
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) z += w[i] * in[static_cast<std::size_t>(i)];
      if (!last) {
        z = std::tanh(z);
      } else if (net.output == OutputActivation::kSigmoid) {
        z = sigmoid(z);
      }
      out[static_cast<std::size_t>(o)] = z;
    }
    tape.activations.push_back(std::move(out));
  }
  return tape.activations.back();
}

// Accumulates dL/dtheta into `acc` given dL/d(output) and returns dL/d(input).
Vector backward(const Mlp& net, const Tape& tape, Vector grad, Gradients* acc) {
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Layer& layer = net.layers[l];
    const Vector& out = tape.activations[l + 1];
    const Vector& in = tape.activations[l];
    const bool last = l + 1 == net.layers.size();
    for (int o = 0; o < layer.out; ++o) {
      const double a = out[static_cast<std::size_t>(o)];
      if (!last) {
        grad[static_cast<std::size_t>(o)] *= 1.0 - a * a;
      } else if (net.output == OutputActivation::kSigmoid) {
        grad[static_cast<std::size_t>(o)] *= a * (1.0 - a);
      }
    }
    Vector prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double g = grad[static_cast<std::size_t>(o)];
      const std::size_t row = static_cast<std::size_t>(o) * layer.in;
      if (acc != nullptr) {
        acc->biases[l][static_cast<std::size_t>(o)] += g;
        for (int i = 0; i < layer.in; ++i) acc->weights[l][row + i] += g * in[static_cast<std::size_t>(i)];
      }
      for (int i = 0; i < layer.in; ++i) prev[static_cast<std::size_t>(i)] += g * layer.weights[row + i];
    }
    grad = std::move(prev);
  }
  return grad;
}

// d safe_log(p) / dp.
double safe_log_slope(double p) { return p > kLogFloor ? 1.0 / p : 0.0; }

void require_batches(const Samples& real, const Samples& noise, LossKind kind) {
  if (kind != LossKind::kGenerator && real.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty real batch");
  }
  if (noise.empty()) throw Error(ErrorCode::kInvalidArgument, "empty noise batch");
}

void sgd_step(Mlp& net, const Gradients& g, double lr) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= lr * g.weights[l][i];
    for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] -= lr * g.biases[l][i];
  }
}

bool all_finite(const Mlp& net) {
  for (const auto& layer : net.layers) {
    for (double v : layer.weights) if (!std::isfinite(v)) return false;
    for (double v : layer.biases) if (!std::isfinite(v)) return false;
  }
  return true;
}

Samples sample_batch(const ToyDistribution& dist, int n, CounterRng& rng) {
  Samples out(static_cast<std::size_t>(n));
  for (auto& s : out) s = {dist.sample(rng)};
  return out;
}

Samples sample_noise(int n, CounterRng& rng) {
  Samples out(static_cast<std::size_t>(n));
  for (auto& s : out) s = {rng.normal()};
  return out;
}

std::vector<int> layer_sizes(const TrainConfig& cfg) {
  std::vector<int> sizes{1};
  for (int i = 0; i < cfg.depth; ++i) sizes.push_back(cfg.hidden);
  sizes.push_back(1);
  return sizes;
}

Vector split_numbers(const std::string& s, char sep) {
  Vector out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad number '" + item + "' in distribution spec");
    }
  }
  return out;
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

void Mlp::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "mlp has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.in < 1 || layer.out < 1 ||
        layer.weights.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.biases.size() != static_cast<std::size_t>(layer.out)) {
      throw Error(ErrorCode::kDimensionMismatch, "mlp layer " + std::to_string(l) + " is malformed");
    }
    if (l > 0 && layers[l - 1].out != layer.in) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mlp layer " + std::to_string(l) + " input does not match the previous output");
    }
  }
  if (!all_finite(*this)) throw Error(ErrorCode::kNumericalError, "mlp has non-finite parameters");
}

Mlp zero_mlp(const std::vector<int>& sizes, OutputActivation output) {
  if (sizes.size() < 2) throw Error(ErrorCode::kInvalidArgument, "mlp needs at least two sizes");
  Mlp net;
  net.output = output;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.biases.assign(static_cast<std::size_t>(layer.out), 0.0);
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

Mlp make_mlp(const std::vector<int>& sizes, OutputActivation output, CounterRng& rng) {
  Mlp net = zero_mlp(sizes, output);
  for (auto& layer : net.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
  }
  return net;
}

Vector mlp_forward(const Mlp& net, const Vector& x) {
  Tape tape;
  return forward_tape(net, x, tape);
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

double Gradients::norm() const {
  double s = 0.0;
  for (const auto& v : weights) for (double x : v) s += x * x;
  for (const auto& v : biases) for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool Gradients::all_zero() const {
  for (const auto& v : weights) for (double x : v) if (x != 0.0) return false;
  for (const auto& v : biases) for (double x : v) if (x != 0.0) return false;
  return true;
}

double safe_log(double p) noexcept { return std::log(std::max(p, kLogFloor)); }

double gan_value(const Vector& d_real, const Vector& d_fake) {
  if (d_real.empty() || d_fake.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "gan_value needs non-empty batches");
  }
  double real = 0.0, fake = 0.0;
  for (double p : d_real) real += safe_log(p);
  for (double p : d_fake) fake += safe_log(1.0 - p);
  return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

GanGradients backprop(const Mlp& generator, const Mlp& discriminator, const Samples& real,
                      const Samples& noise, LossKind kind) {
  if (kind == LossKind::kMeanSquared) {
    throw Error(ErrorCode::kInvalidArgument, "use backprop_mse for the mean-squared loss");
  }
  require_batches(real, noise, kind);
  GanGradients out{Gradients::zeros_like(generator), Gradients::zeros_like(discriminator), 0.0};
  Tape g_tape, d_tape;

  if (kind == LossKind::kDiscriminator) {
    const double nr = static_cast<double>(real.size()), nf = static_cast<double>(noise.size());
    for (const Vector& x : real) {
      const double p = forward_tape(discriminator, x, d_tape)[0];
      out.loss -= safe_log(p) / nr;
      backward(discriminator, d_tape, {-safe_log_slope(p) / nr}, &out.discriminator);
    }
    for (const Vector& z : noise) {
      const Vector fake = forward_tape(generator, z, g_tape);
      const double p = forward_tape(discriminator, fake, d_tape)[0];
      out.loss -= safe_log(1.0 - p) / nf;
      backward(discriminator, d_tape, {safe_log_slope(1.0 - p) / nf}, &out.discriminator);
    }
    return out;
  }

  const double n = static_cast<double>(noise.size());
  for (const Vector& z : noise) {
    const Vector fake = forward_tape(generator, z, g_tape);
    const double p = forward_tape(discriminator, fake, d_tape)[0];
    out.loss -= safe_log(p) / n;
    // Through D without touching its gradient, then into G.
    Vector g_fake = backward(discriminator, d_tape, {-safe_log_slope(p) / n}, nullptr);
    backward(generator, g_tape, std::move(g_fake), &out.generator);
  }
  return out;
}

double loss_value(const Mlp& generator, const Mlp& discriminator, const Samples& real,
                  const Samples& noise, LossKind kind) {
  require_batches(real, noise, kind);
  if (kind == LossKind::kDiscriminator) {
    Vector dr, df;
    for (const Vector& x : real) dr.push_back(mlp_forward(discriminator, x)[0]);
    for (const Vector& z : noise) df.push_back(mlp_forward(discriminator, mlp_forward(generator, z))[0]);
    return -gan_value(dr, df);
  }
  if (kind == LossKind::kGenerator) {
    double loss = 0.0;
    for (const Vector& z : noise) {
      loss -= safe_log(mlp_forward(discriminator, mlp_forward(generator, z))[0]);
    }
    return loss / static_cast<double>(noise.size());
  }
  throw Error(ErrorCode::kInvalidArgument, "use mse_loss for the mean-squared loss");
}

MseResult backprop_mse(const Mlp& net, const Samples& inputs, const Samples& targets) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "mse needs equally many non-zero inputs and targets");
  }
  MseResult out{Gradients::zeros_like(net), 0.0};
  Tape tape;
  const double n = static_cast<double>(inputs.size());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const Vector y = forward_tape(net, inputs[s], tape);
    if (y.size() != targets[s].size()) {
      throw Error(ErrorCode::kDimensionMismatch, "mse target has the wrong dimension");
    }
    Vector g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - targets[s][i];
      out.loss += 0.5 * d * d / n;
      g[i] = d / n;
    }
    backward(net, tape, std::move(g), &out.grads);
  }
  return out;
}

double mse_loss(const Mlp& net, const Samples& inputs, const Samples& targets) {
  double loss = 0.0;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const Vector y = mlp_forward(net, inputs[s]);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - targets[s][i];
      loss += 0.5 * d * d;
    }
  }
  return loss / static_cast<double>(inputs.size());
}

double& parameter(Mlp& net, std::size_t index) {
  for (auto& layer : net.layers) {
    if (index < layer.weights.size()) return layer.weights[index];
    index -= layer.weights.size();
    if (index < layer.biases.size()) return layer.biases[index];
    index -= layer.biases.size();
  }
  throw Error(ErrorCode::kInvalidArgument, "parameter index out of range");
}

double gradient_at(const Gradients& g, std::size_t index) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    if (index < g.weights[l].size()) return g.weights[l][index];
    index -= g.weights[l].size();
    if (index < g.biases[l].size()) return g.biases[l][index];
    index -= g.biases[l].size();
  }
  throw Error(ErrorCode::kInvalidArgument, "gradient index out of range");
}

ToyDistribution ToyDistribution::gaussian(double mean, double std) {
  ToyDistribution d;
  d.kind = Kind::kGaussian;
  d.means = {mean};
  d.stds = {std};
  d.weights = {1.0};
  d.validate();
  return d;
}

ToyDistribution ToyDistribution::mixture(Vector weights, Vector means, Vector stds) {
  ToyDistribution d;
  d.kind = Kind::kMixture;
  d.weights = std::move(weights);
  d.means = std::move(means);
  d.stds = std::move(stds);
  d.validate();
  return d;
}

ToyDistribution ToyDistribution::bins(double lo, double hi, Vector masses) {
  ToyDistribution d;
  d.kind = Kind::kDiscreteBins;
  d.lo = lo;
  d.hi = hi;
  d.masses = std::move(masses);
  d.validate();
  return d;
}

ToyDistribution ToyDistribution::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "distribution spec '" + spec + "' lacks a ':'");
  }
  const std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
  if (kind == "gaussian") {
    const Vector v = split_numbers(rest, ',');
    if (v.size() != 2) throw Error(ErrorCode::kInvalidArgument, "gaussian:<mean>,<std>");
    return gaussian(v[0], v[1]);
  }
  if (kind == "mixture") {
    Vector w, m, s;
    std::stringstream ss(rest);
    std::string comp;
    while (std::getline(ss, comp, ';')) {
      const Vector v = split_numbers(comp, ',');
      if (v.size() != 3) throw Error(ErrorCode::kInvalidArgument, "mixture:<w>,<mean>,<std>;...");
      w.push_back(v[0]);
      m.push_back(v[1]);
      s.push_back(v[2]);
    }
    return mixture(w, m, s);
  }
  if (kind == "bins") {
    const auto second = rest.find(':');
    if (second == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "bins:<lo>,<hi>:<m1>,...");
    const Vector range = split_numbers(rest.substr(0, second), ',');
    if (range.size() != 2) throw Error(ErrorCode::kInvalidArgument, "bins:<lo>,<hi>:<m1>,...");
    return bins(range[0], range[1], split_numbers(rest.substr(second + 1), ','));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown distribution kind '" + kind + "'");
}

void ToyDistribution::validate() const {
  auto sums_to_one = [](const Vector& v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    return std::abs(s - 1.0) < 1e-9 &&
           std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
  };
  if (kind == Kind::kDiscreteBins) {
    if (masses.empty() || !(hi > lo) || !sums_to_one(masses)) {
      throw Error(ErrorCode::kInvalidArgument, "bin distribution needs lo < hi and masses summing to 1");
    }
    return;
  }
  if (means.empty() || means.size() != stds.size() || means.size() != weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "distribution component lists differ in length");
  }
  for (double s : stds) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distribution std must be positive");
  }
  if (!sums_to_one(weights)) throw Error(ErrorCode::kInvalidArgument, "mixture weights must sum to 1");
}

double ToyDistribution::sample(CounterRng& rng) const {
  const Vector& probs = kind == Kind::kDiscreteBins ? masses : weights;
  std::size_t pick = 0;
  if (probs.size() > 1) {
    const double u = rng.uniform();
    double cum = 0.0;
    pick = probs.size() - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
  }
  if (kind == Kind::kDiscreteBins) {
    const double width = (hi - lo) / static_cast<double>(masses.size());
    return lo + width * (static_cast<double>(pick) + rng.uniform());
  }
  return means[pick] + stds[pick] * rng.normal();
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (steps < 0) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 0");
  if (d_steps_per_g_step < 1) throw Error(ErrorCode::kInvalidArgument, "d_steps_per_g_step must be >= 1");
  if (hidden < 1 || depth < 1) throw Error(ErrorCode::kInvalidArgument, "hidden and depth must be >= 1");
}

TrainResult train_toy_gan(const ToyDistribution& data, const TrainConfig& cfg) {
  data.validate();
  cfg.validate();
  CounterRng g_init(cfg.seed, 1), d_init(cfg.seed, 2);
  CounterRng data_rng(cfg.seed, 3), noise_rng(cfg.seed, 4);
  TrainResult r;
  r.generator = make_mlp(layer_sizes(cfg), OutputActivation::kIdentity, g_init);
  r.discriminator = make_mlp(layer_sizes(cfg), OutputActivation::kSigmoid, d_init);
  r.trace.reserve(static_cast<std::size_t>(cfg.steps));

  for (int step = 0; step < cfg.steps; ++step) {
    TraceRecord rec;
    rec.step = step;
    for (int j = 0; j < cfg.d_steps_per_g_step; ++j) {
      const Samples real = sample_batch(data, cfg.batch_size, data_rng);
      const Samples noise = sample_noise(cfg.batch_size, noise_rng);
      Vector dr, df;
      for (const auto& x : real) dr.push_back(mlp_forward(r.discriminator, x)[0]);
      for (const auto& z : noise) df.push_back(mlp_forward(r.discriminator, mlp_forward(r.generator, z))[0]);
      rec.value = gan_value(dr, df);
      rec.d_acc_real = static_cast<double>(std::count_if(dr.begin(), dr.end(), [](double p) { return p > 0.5; })) / dr.size();
      rec.d_acc_fake = static_cast<double>(std::count_if(df.begin(), df.end(), [](double p) { return p < 0.5; })) / df.size();
      const GanGradients g = backprop(r.generator, r.discriminator, real, noise, LossKind::kDiscriminator);
      rec.grad_norm_d = g.discriminator.norm();
      sgd_step(r.discriminator, g.discriminator, cfg.learning_rate);
    }
    const Samples noise = sample_noise(cfg.batch_size, noise_rng);
    const GanGradients g = backprop(r.generator, r.discriminator, {}, noise, LossKind::kGenerator);
    rec.grad_norm_g = g.generator.norm();
    sgd_step(r.generator, g.generator, cfg.learning_rate);
    if (!all_finite(r.generator) || !all_finite(r.discriminator)) {
      throw Error(ErrorCode::kNumericalError, "training diverged at step " + std::to_string(step));
    }
    r.trace.push_back(rec);
  }
  return r;
}

Vector optimal_discriminator(const Vector& p_data, const Vector& p_g) {
  if (p_data.size() != p_g.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "optimal_discriminator: bin grids differ");
  }
  Vector d(p_data.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = p_data[i] + p_g[i];
    d[i] = s > 0.0 ? p_data[i] / s : 0.5;
  }
  return d;
}

double binned_value(const Vector& p_data, const Vector& p_g, const Vector& d) {
  if (p_data.size() != p_g.size() || p_data.size() != d.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "binned_value: bin grids differ");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (p_data[i] > 0.0) v += p_data[i] * safe_log(d[i]);
    if (p_g[i] > 0.0) v += p_g[i] * safe_log(1.0 - d[i]);
  }
  return v;
}

Vector estimate_pg(const Mlp& generator, const ToyDistribution& noise, int n_samples,
                   const BinGrid& bins, CounterRng& rng) {
  if (n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "estimate_pg needs n_samples >= 1");
  if (bins.count < 1 || !(bins.hi > bins.lo)) throw Error(ErrorCode::kInvalidArgument, "bad bin grid");
  Vector mass(static_cast<std::size_t>(bins.count), 0.0);
  const double width = (bins.hi - bins.lo) / bins.count;
  for (int s = 0; s < n_samples; ++s) {
    const double v = mlp_forward(generator, {noise.sample(rng)})[0];
    const int b = std::clamp(static_cast<int>(std::floor((v - bins.lo) / width)), 0, bins.count - 1);
    mass[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& m : mass) m /= n_samples;
  return mass;
}

Evaluation evaluate(const TrainResult& result, const ToyDistribution& data, int n_samples,
                    std::uint64_t seed) {
  CounterRng noise_rng(seed, 5), data_rng(seed, 6);
  Evaluation e;
  double sum = 0.0, sq = 0.0;
  int fake_rejected = 0, real_accepted = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double g = mlp_forward(result.generator, {noise_rng.normal()})[0];
    sum += g;
    sq += g * g;
    if (mlp_forward(result.discriminator, {g})[0] < 0.5) ++fake_rejected;
    if (mlp_forward(result.discriminator, {data.sample(data_rng)})[0] > 0.5) ++real_accepted;
  }
  e.generated_mean = sum / n_samples;
  e.generated_std = std::sqrt(std::max(0.0, sq / n_samples - e.generated_mean * e.generated_mean));
  e.d_acc_real = static_cast<double>(real_accepted) / n_samples;
  e.d_acc_fake = static_cast<double>(fake_rejected) / n_samples;
  return e;
}

void save_ckw(const Mlp& net, const std::filesystem::path& path) {
  net.validate();
  std::vector<std::uint8_t> out(kCkwMagic.begin(), kCkwMagic.end());
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto f64 = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  };
  u32(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    u32(static_cast<std::uint32_t>(layer.out));
    u32(static_cast<std::uint32_t>(layer.in));
    for (double w : layer.weights) f64(w);
    for (double b : layer.biases) f64(b);
  }
  write_file_bytes(path, out);
}

Mlp load_ckw(const std::filesystem::path& path, OutputActivation output) {
  const auto bytes = read_file_bytes(path);
  std::size_t at = 0;
  auto need = [&](std::size_t n) {
    if (at + n > bytes.size()) throw Error(ErrorCode::kDecodeError, path.string() + ": truncated CKW1");
  };
  auto u32 = [&] {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at++]) << (8 * i);
    return v;
  };
  auto f64 = [&] {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[at++]) << (8 * i);
    return std::bit_cast<double>(v);
  };
  need(4);
  if (!std::equal(kCkwMagic.begin(), kCkwMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kDecodeError, path.string() + ": missing CKW1 header");
  }
  at = 4;
  Mlp net;
  net.output = output;
  const std::uint32_t count = u32();
  for (std::uint32_t l = 0; l < count; ++l) {
    Layer layer;
    layer.out = static_cast<int>(u32());
    layer.in = static_cast<int>(u32());
    need(8 * (static_cast<std::size_t>(layer.out) * layer.in + layer.out));
    layer.weights.resize(static_cast<std::size_t>(layer.out) * layer.in);
    for (double& w : layer.weights) w = f64();
    layer.biases.resize(static_cast<std::size_t>(layer.out));
    for (double& b : layer.biases) b = f64();
    net.layers.push_back(std::move(layer));
  }
  if (at != bytes.size()) throw Error(ErrorCode::kDecodeError, path.string() + ": trailing bytes in CKW1");
  net.validate();
  return net;
}

void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "step,value,d_acc_real,d_acc_fake,grad_norm_g,grad_norm_d\n";
  char line[256];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.value,
                  r.d_acc_real, r.d_acc_fake, r.grad_norm_g, r.grad_norm_d);
    out << line;
  }
}

}  // namespace cartoonkit::gan
