#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace xview {

/// Fourier positional embedding of a normalized 2D pixel coordinate:
///   PE(x) = W [x | sin(2 pi B^T x) | cos(2 pi B^T x)] + b
/// with B (2 x K) fixed at construction.
class FourierPE {
 public:
  FourierPE(Eigen::MatrixXd B, Eigen::MatrixXd W, Eigen::VectorXd b);

  /// B drawn from N(0, sigma^2) with `seed`; W = I and b = 0, so the output
  /// is the raw feature vector of size 2 + 2K.
  static FourierPE gaussian(int K = 32, double sigma = 10.0, std::uint64_t seed = 0);

  int frequencies() const { return static_cast<int>(B_.cols()); }
  int feature_dim() const { return 2 + 2 * frequencies(); }
  int output_dim() const { return static_cast<int>(W_.rows()); }

  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::VectorXd& b() const { return b_; }

  /// Feature vector [x | sin | cos] before the affine projection.
  Eigen::VectorXd features(const Eigen::Vector2d& x) const;

 private:
  Eigen::MatrixXd B_;
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
};

/// Throws ErrorKind::domain unless x lies in [0, 1]^2.
Eigen::VectorXd fourier_pe(const Eigen::Vector2d& x, const FourierPE& pe);

/// Softmax-weighted sum of `states` (all of equal dimension).
Eigen::VectorXd gated_fusion(std::span<const Eigen::VectorXd> states,
                             std::span<const double> gate_logits);

}  // namespace xview
