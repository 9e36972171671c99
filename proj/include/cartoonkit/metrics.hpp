#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cartoonkit/image.hpp"
#include "cartoonkit/structure.hpp"
#include "cartoonkit/surface.hpp"

namespace cartoonkit {

struct MomentPair {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Fixed random convolutional stack standing in for a pretrained network.
/// Every layer is a 3x3 stride-2 convolution with edge clamping followed by
/// ReLU; the last map is global-average-pooled. Weights are a pure function
/// of the seed unless loaded from a CKW1 file.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::uint64_t seed = 42,
                            std::vector<int> widths = {16, 32, 64});

  /// Layer i of the file must be (widths[i], in_channels * 9).
  static FeatureExtractor from_ckw(const std::filesystem::path& path);

  int dim() const { return widths_.back(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<int>& widths() const { return widths_; }

  std::vector<double> operator()(const Image& img) const;

 private:
  struct Conv {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // out x in x 3 x 3
    std::vector<double> biases;
  };

  struct Empty {};
  explicit FeatureExtractor(Empty) {}

  std::uint64_t seed_ = 0;
  std::vector<int> widths_;
  std::vector<Conv> layers_;
};

std::vector<double> extract_features(const Image& img, const FeatureExtractor& fe);

/// Sample mean and 1/(n-1) covariance, symmetrized.
MomentPair moments(const std::vector<std::vector<double>>& features);

/// Symmetric PSD square root through an eigendecomposition, eigenvalues
/// below zero clipped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

/// Tr((A^1/2 B A^1/2)^1/2).
double fid_cross_trace(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b);

double fid_from_moments(const MomentPair& a, const MomentPair& b);

double fid(const std::vector<Image>& images_a, const std::vector<Image>& images_b,
           const FeatureExtractor& fe);

enum class RepresentationKind { kSurface, kStructure, kTexture };

/// Extractor settings used by the losses; fixed so a loss is a deterministic
/// function of its two images.
struct LossParams {
  std::optional<GuidedFilterParams> surface;  // default: size-scaled
  StructureParams structure;
  std::uint64_t texture_seed = 0;
};

double representation_loss(const Image& a, const Image& b,
                           RepresentationKind kind,
                           const LossParams& params = {});

struct StyleWeights {
  double surface = 1.0;
  double structure = 1.0;
  double texture = 1.0;
};

double weighted_style_loss(const Image& a, const Image& b,
                           const StyleWeights& weights,
                           const LossParams& params = {});

}  // namespace cartoonkit
