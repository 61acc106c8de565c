#include "xview/embedding.hpp"

#include "xview/error.hpp"
#include "xview/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace xview {

FourierPE::FourierPE(Eigen::MatrixXd B, Eigen::MatrixXd W, Eigen::VectorXd b)
    : B_(std::move(B)), W_(std::move(W)), b_(std::move(b)) {
  if (B_.rows() != 2 || B_.cols() < 1) {
    throw Error(ErrorKind::structural, "FourierPE: B must be 2 x K with K >= 1");
  }
  if (W_.cols() != feature_dim() || W_.rows() != b_.size()) {
    throw Error(ErrorKind::structural, "FourierPE: W must be D_out x (2 + 2K), b of size D_out");
  }
}

FourierPE FourierPE::gaussian(int K, double sigma, std::uint64_t seed) {
  if (K < 1 || !(sigma > 0.0)) {
    throw Error(ErrorKind::configuration, "FourierPE: need K >= 1 and sigma > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::MatrixXd B(2, K);
  for (int k = 0; k < K; ++k) {
    for (int r = 0; r < 2; ++r) B(r, k) = gauss(rng);
  }
  const int d = 2 + 2 * K;
  return FourierPE(std::move(B), Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
}

Eigen::VectorXd FourierPE::features(const Eigen::Vector2d& x) const {
  const int K = frequencies();
  const Eigen::VectorXd proj = 2.0 * kPi * (B_.transpose() * x);
  Eigen::VectorXd f(2 + 2 * K);
  f.head<2>() = x;
  f.segment(2, K) = proj.array().sin();
  f.segment(2 + K, K) = proj.array().cos();
  return f;
}

Eigen::VectorXd fourier_pe(const Eigen::Vector2d& x, const FourierPE& pe) {
  if (!(x.array() >= 0.0).all() || !(x.array() <= 1.0).all()) {
    throw Error(ErrorKind::domain, "fourier_pe: coordinate outside the unit square");
  }
  return pe.W() * pe.features(x) + pe.b();
}

Eigen::VectorXd gated_fusion(std::span<const Eigen::VectorXd> states,
                             std::span<const double> gate_logits) {
  if (states.empty() || states.size() != gate_logits.size()) {
    throw Error(ErrorKind::structural, "gated_fusion: need one logit per state, N >= 1");
  }
  const Eigen::Index dim = states.front().size();
  for (const auto& s : states) {
    if (s.size() != dim) throw Error(ErrorKind::structural, "gated_fusion: state dims differ");
  }
  const double peak = *std::max_element(gate_logits.begin(), gate_logits.end());
  std::vector<double> w(gate_logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(gate_logits[i] - peak);
    total += w[i];
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < w.size(); ++i) out += (w[i] / total) * states[i];
  return out;
}

}  // namespace xview
