#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cartoonkit/rng.hpp"

namespace cartoonkit::gan {

using Vector = std::vector<double>;
using Samples = std::vector<Vector>;

enum class OutputActivation { kIdentity, kSigmoid };

struct Layer {
  int in = 0;
  int out = 0;
  /// out x in, row-major.
  Vector weights;
  Vector biases;
};

/// Fully connected net: tanh on hidden layers, `output` on the last one.
struct Mlp {
  std::vector<Layer> layers;
  OutputActivation output = OutputActivation::kIdentity;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t parameter_count() const;
  void validate() const;
};

/// sizes = {in, hidden..., out}. Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// biases zero.
Mlp make_mlp(const std::vector<int>& sizes, OutputActivation output,
             CounterRng& rng);
Mlp zero_mlp(const std::vector<int>& sizes, OutputActivation output);

Vector mlp_forward(const Mlp& net, const Vector& x);

/// Gradient with the same layout as Mlp::layers.
struct Gradients {
  std::vector<Vector> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const Mlp& net);
  double norm() const;
  bool all_zero() const;
};

/// Floor applied inside every logarithm of the value function.
inline constexpr double kLogFloor = 1e-7;
double safe_log(double p) noexcept;

/// V = mean ln d_real + mean ln(1 - d_fake).
double gan_value(const Vector& d_real, const Vector& d_fake);

enum class LossKind {
  /// -V, differentiated w.r.t. the discriminator.
  kDiscriminator,
  /// Non-saturating -mean ln D(G(z)), differentiated w.r.t. the generator.
  kGenerator,
  /// 0.5 * mean ||net(x) - target||^2 on a single net.
  kMeanSquared,
};

struct GanGradients {
  Gradients generator;
  Gradients discriminator;
  double loss = 0.0;
};

/// Reverse-mode gradients of the adversarial losses. Only the net named by
/// `kind` receives a (possibly) nonzero gradient; the other is zero.
GanGradients backprop(const Mlp& generator, const Mlp& discriminator,
                      const Samples& real, const Samples& noise, LossKind kind);

/// Loss value alone (for finite-difference checks).
double loss_value(const Mlp& generator, const Mlp& discriminator,
                  const Samples& real, const Samples& noise, LossKind kind);

struct MseResult {
  Gradients grads;
  double loss = 0.0;
};
MseResult backprop_mse(const Mlp& net, const Samples& inputs,
                       const Samples& targets);
double mse_loss(const Mlp& net, const Samples& inputs, const Samples& targets);

/// Parameter access in a flat order (layer by layer, weights then biases).
double& parameter(Mlp& net, std::size_t index);
double gradient_at(const Gradients& g, std::size_t index);

struct ToyDistribution {
  enum class Kind { kGaussian, kMixture, kDiscreteBins };
  Kind kind = Kind::kGaussian;
  /// Gaussian: one entry. Mixture: one per component.
  Vector means{0.0};
  Vector stds{1.0};
  Vector weights{1.0};
  /// Discrete bins: [lo, hi] split into masses.size() equal bins.
  double lo = 0.0;
  double hi = 1.0;
  Vector masses;

  static ToyDistribution gaussian(double mean, double std);
  static ToyDistribution mixture(Vector weights, Vector means, Vector stds);
  static ToyDistribution bins(double lo, double hi, Vector masses);
  /// "gaussian:3,0.5" | "mixture:w,m,s;w,m,s" | "bins:lo,hi:m1,m2,..."
  static ToyDistribution parse(const std::string& spec);

  void validate() const;
  double sample(CounterRng& rng) const;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 2;
  int steps = 1000;
  int d_steps_per_g_step = 1;
  std::uint64_t seed = 0;
  int hidden = 16;
  /// Number of hidden layers in both nets.
  int depth = 1;

  void validate() const;
};

struct TraceRecord {
  int step = 0;
  double value = 0.0;
  double d_acc_real = 0.0;
  double d_acc_fake = 0.0;
  double grad_norm_g = 0.0;
  double grad_norm_d = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

using TrainTrace = std::vector<TraceRecord>;

struct TrainResult {
  Mlp generator;
  Mlp discriminator;
  TrainTrace trace;
};

/// Alternating SGD: d_steps ascent steps on V for the discriminator, then one
/// non-saturating descent step for the generator. Noise is N(0,1).
/// Throws Error(kNumericalError) naming the step if a parameter goes
/// non-finite.
TrainResult train_toy_gan(const ToyDistribution& data, const TrainConfig& cfg);

/// Per-bin optimal discriminator p_data / (p_data + p_g); 0.5 where both
/// masses vanish.
Vector optimal_discriminator(const Vector& p_data, const Vector& p_g);

/// V evaluated in expectation on a bin grid for per-bin D.
double binned_value(const Vector& p_data, const Vector& p_g, const Vector& d);

struct BinGrid {
  double lo = -4.0;
  double hi = 4.0;
  int count = 20;
};

/// Histogram of G(z), z drawn from `noise`, mass-normalized. Samples outside
/// the grid are clamped into the end bins.
Vector estimate_pg(const Mlp& generator, const ToyDistribution& noise,
                   int n_samples, const BinGrid& bins, CounterRng& rng);

struct Evaluation {
  double generated_mean = 0.0;
  double generated_std = 0.0;
  double d_acc_real = 0.0;
  double d_acc_fake = 0.0;
};
Evaluation evaluate(const TrainResult& result, const ToyDistribution& data,
                    int n_samples, std::uint64_t seed);

/// CKW1: magic, LE u32 layer count, per layer LE u32 out, u32 in, then
/// out*in weights and out biases as LE float64.
void save_ckw(const Mlp& net, const std::filesystem::path& path);
Mlp load_ckw(const std::filesystem::path& path, OutputActivation output);

void write_trace_csv(const TrainTrace& trace, const std::filesystem::path& path);

}  // namespace cartoonkit::gan
