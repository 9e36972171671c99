#include "cartoonkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cartoonkit/error.hpp"
#include "cartoonkit/gan.hpp"
#include "cartoonkit/rng.hpp"
#include "cartoonkit/texture.hpp"

namespace cartoonkit {
namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;

// H x W x C activations, interleaved.
struct FeatureMap {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> v;

  double at(int y, int x, int ch) const {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
};

void check_eigen(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& solver) {
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalError, "symmetric eigensolver did not converge");
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

FeatureExtractor::FeatureExtractor(std::uint64_t seed, std::vector<int> widths)
    : seed_(seed), widths_(std::move(widths)) {
  if (widths_.empty()) throw Error(ErrorCode::kInvalidArgument, "feature extractor needs a layer");
  CounterRng rng(seed, 0x4645);  // stream reserved for extractor weights
  int in = 3;
  for (int out : widths_) {
    if (out < 1) throw Error(ErrorCode::kInvalidArgument, "feature widths must be positive");
    Conv conv;
    conv.in = in;
    conv.out = out;
    const int fan_in = in * kKernel * kKernel;
    const double bound = std::sqrt(6.0 / fan_in);
    conv.weights.resize(static_cast<std::size_t>(out) * fan_in);
    for (double& w : conv.weights) w = rng.uniform(-bound, bound);
    conv.biases.assign(static_cast<std::size_t>(out), 0.0);
    layers_.push_back(std::move(conv));
    in = out;
  }
}

FeatureExtractor FeatureExtractor::from_ckw(const std::filesystem::path& path) {
  const gan::Mlp net = gan::load_ckw(path, gan::OutputActivation::kIdentity);
  FeatureExtractor fe{Empty{}};
  int in = 3;
  for (const auto& layer : net.layers) {
    if (layer.in != in * kKernel * kKernel) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "CKW1 feature layer expects " + std::to_string(in * kKernel * kKernel) +
                      " inputs, file has " + std::to_string(layer.in));
    }
    fe.layers_.push_back({in, layer.out, layer.weights, layer.biases});
    fe.widths_.push_back(layer.out);
    in = layer.out;
  }
  return fe;
}

std::vector<double> FeatureExtractor::operator()(const Image& img) const {
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "extract_features expects a 3-channel image");
  }
  FeatureMap cur{img.height(), img.width(), 3, {img.data().begin(), img.data().end()}};
  for (const Conv& conv : layers_) {
    FeatureMap next;
    next.h = (cur.h + kStride - 1) / kStride;
    next.w = (cur.w + kStride - 1) / kStride;
    next.c = conv.out;
    next.v.assign(static_cast<std::size_t>(next.h) * next.w * next.c, 0.0);
    std::vector<double> patch(static_cast<std::size_t>(conv.in) * kKernel * kKernel);
    for (int y = 0; y < next.h; ++y) {
      for (int x = 0; x < next.w; ++x) {
        std::size_t k = 0;
        for (int ci = 0; ci < conv.in; ++ci) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int sy = std::clamp(y * kStride + dy, 0, cur.h - 1);
              const int sx = std::clamp(x * kStride + dx, 0, cur.w - 1);
              patch[k++] = cur.at(sy, sx, ci);
            }
          }
        }
        double* out = next.v.data() + (static_cast<std::size_t>(y) * next.w + x) * next.c;
        for (int co = 0; co < conv.out; ++co) {
          const double* w = conv.weights.data() + static_cast<std::size_t>(co) * patch.size();
          double s = conv.biases[static_cast<std::size_t>(co)];
          for (std::size_t i = 0; i < patch.size(); ++i) s += w[i] * patch[i];
          out[co] = std::max(0.0, s);
        }
      }
    }
    cur = std::move(next);
  }
  std::vector<double> pooled(static_cast<std::size_t>(cur.c), 0.0);
  for (int y = 0; y < cur.h; ++y) {
    for (int x = 0; x < cur.w; ++x) {
      for (int c = 0; c < cur.c; ++c) pooled[static_cast<std::size_t>(c)] += cur.at(y, x, c);
    }
  }
  const double n = static_cast<double>(cur.h) * cur.w;
  for (double& v : pooled) v /= n;
  return pooled;
}

std::vector<double> extract_features(const Image& img, const FeatureExtractor& fe) {
  return fe(img);
}

MomentPair moments(const std::vector<std::vector<double>>& features) {
  if (features.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "moments need at least two feature vectors");
  }
  const std::size_t d = features.front().size();
  const double n = static_cast<double>(features.size());
  MomentPair m{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
               Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
  for (const auto& f : features) {
    if (f.size() != d) throw Error(ErrorCode::kDimensionMismatch, "feature vectors differ in length");
    m.mean += Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(d));
  }
  m.mean /= n;
  for (const auto& f : features) {
    const Eigen::VectorXd c =
        Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(d)) - m.mean;
    m.cov.noalias() += c * c.transpose();
  }
  m.cov = symmetrized(m.cov / (n - 1.0));
  return m;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(m));
  check_eigen(solver);
  const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrized(solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose());
}

double fid_cross_trace(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b) {
  if (cov_a.rows() != cov_b.rows() || cov_a.cols() != cov_b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariances differ in dimension");
  }
  const Eigen::MatrixXd root_a = psd_sqrt(cov_a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(root_a * cov_b * root_a),
                                                        Eigen::EigenvaluesOnly);
  check_eigen(solver);
  return solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double fid_from_moments(const MomentPair& a, const MomentPair& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != a.mean.size() ||
      b.cov.rows() != b.mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "moment pairs differ in dimension");
  }
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.cov.trace() + b.cov.trace() - 2.0 * fid_cross_trace(a.cov, b.cov);
  return std::max(0.0, mean_term + trace_term);
}

double fid(const std::vector<Image>& images_a, const std::vector<Image>& images_b,
           const FeatureExtractor& fe) {
  if (images_a.size() < 2 || images_b.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "fid needs at least two images per set");
  }
  std::vector<std::vector<double>> fa, fb;
  for (const auto& img : images_a) fa.push_back(fe(img));
  for (const auto& img : images_b) fb.push_back(fe(img));
  return fid_from_moments(moments(fa), moments(fb));
}

double representation_loss(const Image& a, const Image& b, RepresentationKind kind,
                           const LossParams& params) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch, "representation_loss of differently shaped images");
  }
  switch (kind) {
    case RepresentationKind::kSurface: {
      const GuidedFilterParams gp =
          params.surface.value_or(default_surface_params(a.height(), a.width()));
      return mean_abs_diff(extract_surface(a, gp), extract_surface(b, gp));
    }
    case RepresentationKind::kStructure:
      return mean_abs_diff(extract_structure(a, params.structure),
                           extract_structure(b, params.structure));
    case RepresentationKind::kTexture:
      return mean_abs_diff(extract_texture(a, params.texture_seed).map,
                           extract_texture(b, params.texture_seed).map);
  }
  return 0.0;
}

double weighted_style_loss(const Image& a, const Image& b, const StyleWeights& weights,
                           const LossParams& params) {
  if (weights.surface < 0.0 || weights.structure < 0.0 || weights.texture < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  }
  double total = 0.0;
  if (weights.surface > 0.0) {
    total += weights.surface * representation_loss(a, b, RepresentationKind::kSurface, params);
  }
  if (weights.structure > 0.0) {
    total += weights.structure * representation_loss(a, b, RepresentationKind::kStructure, params);
  }
  if (weights.texture > 0.0) {
    total += weights.texture * representation_loss(a, b, RepresentationKind::kTexture, params);
  }
  return total;
}

}  // namespace cartoonkit
