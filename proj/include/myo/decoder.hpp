// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "myo/dsp.hpp"
#include "myo/types.hpp"

namespace myo::decoder {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct TrainOptions {
  /// Explicit ridge strength. When unset, 1e-6 * trace(G) / dim is used, and
  /// only if the normal-equation matrix G is ill-conditioned.
  std::optional<double> ridge;
  /// Eigenvalue ratio beyond which G counts as ill-conditioned.
  double condition_limit = 1e12;
};

/// Position-only Kalman filter over k DOFs observed through 21 MAV features.
///
///   x_t = A x_{t-1} + w,  w ~ N(0, W)
///   z_t = H x_t + q,      q ~ N(0, Q)
///
/// The internal estimate is never clamped; only the emitted output is shaped
/// (per-DOF dead-zone, then clamp to [-1, 1]).
class KalmanModel {
public:
  KalmanModel(Matrix A, Matrix W, Matrix H, Matrix Q, std::vector<std::size_t> dofs);

  std::size_t dof_count() const { return static_cast<std::size_t>(A_.rows()); }
  std::size_t feature_count() const { return static_cast<std::size_t>(H_.rows()); }

  const Matrix &A() const { return A_; }
  const Matrix &W() const { return W_; }
  const Matrix &H() const { return H_; }
  const Matrix &Q() const { return Q_; }

  /// Indices (into the six DOF labels) of the DOFs this model decodes.
  const std::vector<std::size_t> &dofs() const { return dofs_; }

  const dsp::BaselineVector &baseline() const { return baseline_; }
  void set_baseline(const dsp::BaselineVector &b);

  const std::vector<double> &dead_zone() const { return dead_zone_; }
  void set_dead_zone(std::vector<double> thresholds);

  /// One predict/update cycle on a baseline-subtracted feature vector.
  /// Throws NumericError (state untouched) if the innovation covariance
  /// cannot be factored.
  std::vector<double> predict_step(std::span<const double> features);
  std::vector<double> predict_step(const FeatureFrame &corrected) {
    return predict_step(std::span<const double>(corrected.mav));
  }

  /// x = 0, P = W.
  void reset();

  const Vector &state() const { return x_; }
  const Matrix &covariance() const { return P_; }
  /// Kalman gain of the most recent update (empty before the first step).
  const Matrix &gain() const { return K_; }

  /// Text dump: dimension headers then row-major values, 12 significant digits.
  void write(std::ostream &os) const;
  static KalmanModel read(std::istream &is);

private:
  std::vector<double> shape(const Vector &x) const;

  Matrix A_, W_, H_, Q_;
  std::vector<std::size_t> dofs_;
  dsp::BaselineVector baseline_{};
  std::vector<double> dead_zone_;
  Vector x_;
  Matrix P_;
  Matrix K_;
};

/// Least-squares fit of A, H with residual covariances W, Q.
///
/// features:   n x 21, baseline-subtracted.
/// kinematics: n x k, values in [-1, 1].
/// frame_index (optional): position of each row on the original timeline;
/// A and W only use row pairs that are adjacent there. Empty means the rows
/// are contiguous.
KalmanModel train(const Matrix &features, const Matrix &kinematics, const TrainOptions &options = {},
                  std::span<const std::size_t> frame_index = {},
                  std::vector<std::size_t> dofs = {});

/// Minimum rows accepted by train() for k DOFs and f features.
inline std::size_t min_training_rows(std::size_t k, std::size_t f = kChannels) {
  return 10 * (k + f);
}

} // namespace myo::decoder
