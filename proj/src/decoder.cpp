// SPDX-License-Identifier: Apache-2.0
#include "myo/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "myo/error.hpp"

namespace myo::decoder {

namespace {

constexpr double kJitterFloor = 1e-15;

Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

// argmin_B ||Y - X B||^2, with ridge only when X'X is ill-conditioned or
// explicitly requested.
Matrix least_squares(const Matrix &X, const Matrix &Y, const TrainOptions &opt, const char *what) {
  const Matrix G = X.transpose() * X;
  const Matrix rhs = X.transpose() * Y;
  const auto dim = G.rows();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double max_ev = eig.eigenvalues().maxCoeff();
  const double min_ev = eig.eigenvalues().minCoeff();
  const bool well_posed = max_ev > 0.0 && min_ev > max_ev / opt.condition_limit;
  if (well_posed && !opt.ridge) {
    return G.ldlt().solve(rhs);
  }
  const double lambda = opt.ridge ? *opt.ridge : 1e-6 * G.trace() / static_cast<double>(dim);
  if (!(lambda > 0.0)) {
    throw NumericError(std::string(what) + ": normal equations are singular");
  }
  const Matrix Greg = G + lambda * Matrix::Identity(dim, dim);
  return Greg.ldlt().solve(rhs);
}

Matrix residual_covariance(const Matrix &residual) {
  const double n = static_cast<double>(residual.rows());
  return symmetrized(residual.transpose() * residual / n);
}

Matrix with_jitter(const Matrix &m) {
  const auto dim = m.rows();
  const double eps = std::max(1e-9 * m.trace() / static_cast<double>(dim), kJitterFloor);
  return m + eps * Matrix::Identity(dim, dim);
}

void check_finite(const Matrix &m, const char *what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

} // namespace

KalmanModel::KalmanModel(Matrix A, Matrix W, Matrix H, Matrix Q, std::vector<std::size_t> dofs)
    : A_(std::move(A)), W_(std::move(W)), H_(std::move(H)), Q_(std::move(Q)),
      dofs_(std::move(dofs)) {
  const auto k = A_.rows();
  const auto f = H_.rows();
  if (A_.cols() != k || W_.rows() != k || W_.cols() != k || H_.cols() != k || Q_.rows() != f ||
      Q_.cols() != f) {
    throw std::invalid_argument("Kalman model matrices have inconsistent dimensions");
  }
  if (f != static_cast<Eigen::Index>(kChannels)) {
    throw std::invalid_argument("Kalman model expects 21 features");
  }
  if (dofs_.empty()) {
    dofs_.resize(static_cast<std::size_t>(k));
    std::iota(dofs_.begin(), dofs_.end(), std::size_t{0});
  }
  if (dofs_.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("DOF index list does not match state dimension");
  }
  dead_zone_.assign(static_cast<std::size_t>(k), 0.0);
  reset();
}

void KalmanModel::set_baseline(const dsp::BaselineVector &b) { baseline_ = b; }

void KalmanModel::set_dead_zone(std::vector<double> thresholds) {
  if (thresholds.size() != dof_count()) {
    throw std::invalid_argument("dead-zone needs one threshold per DOF");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0)) {
      throw std::invalid_argument("dead-zone thresholds must be non-negative");
    }
  }
  dead_zone_ = std::move(thresholds);
}

void KalmanModel::reset() {
  x_ = Vector::Zero(A_.rows());
  P_ = W_;
  K_.resize(0, 0);
}

std::vector<double> KalmanModel::predict_step(std::span<const double> features) {
  if (features.size() != feature_count()) {
    throw std::invalid_argument("feature vector has " + std::to_string(features.size()) +
                                " entries, model expects " + std::to_string(feature_count()));
  }
  const Vector z = Eigen::Map<const Vector>(features.data(), static_cast<Eigen::Index>(features.size()));
  if (!z.allFinite()) {
    throw std::invalid_argument("feature vector contains non-finite values");
  }

  const Vector x_prior = A_ * x_;
  const Matrix P_prior = symmetrized(A_ * P_ * A_.transpose() + W_);
  const Matrix S = symmetrized(H_ * P_prior * H_.transpose() + Q_);
  const Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw NumericError("innovation covariance is not positive definite");
  }
  const Matrix K = ldlt.solve(H_ * P_prior).transpose();
  if (!K.allFinite()) {
    throw NumericError("Kalman gain is not finite");
  }

  const auto k = A_.rows();
  const Matrix I_KH = Matrix::Identity(k, k) - K * H_;
  x_ = x_prior + K * (z - H_ * x_prior);
  P_ = symmetrized(I_KH * P_prior * I_KH.transpose() + K * Q_ * K.transpose());
  K_ = K;
  return shape(x_);
}

std::vector<double> KalmanModel::shape(const Vector &x) const {
  std::vector<double> out(static_cast<std::size_t>(x.size()));
  for (std::size_t d = 0; d < out.size(); ++d) {
    double v = x(static_cast<Eigen::Index>(d));
    if (std::abs(v) < dead_zone_[d]) {
      v = 0.0;
    }
    out[d] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

namespace {

void write_matrix(std::ostream &os, const char *name, const Matrix &m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", m(r, c));
      os << (c ? " " : "") << buf;
    }
    os << '\n';
  }
}

class LineReader {
public:
  explicit LineReader(std::istream &is) : is_(is) {}

  std::istringstream next(const char *expect) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      if (!line.empty() && line[0] != '#') {
        return std::istringstream(line);
      }
    }
    throw FormatError(line_no_, std::string("unexpected end of model file, expected ") + expect);
  }

  std::size_t line() const { return line_no_; }

private:
  std::istream &is_;
  std::size_t line_no_ = 0;
};

Matrix read_matrix(LineReader &in, const std::string &name) {
  auto header = in.next("matrix header");
  std::string tag, got;
  Eigen::Index rows = 0, cols = 0;
  if (!(header >> tag >> got >> rows >> cols) || tag != "matrix" || got != name || rows < 0 ||
      cols < 0) {
    throw FormatError(in.line(), "expected 'matrix " + name + " <rows> <cols>'");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    auto row = in.next("matrix row");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(row >> m(r, c))) {
        throw FormatError(in.line(), "matrix " + name + " row is short or malformed");
      }
    }
    std::string extra;
    if (row >> extra) {
      throw FormatError(in.line(), "matrix " + name + " row has extra values");
    }
  }
  return m;
}

} // namespace

void KalmanModel::write(std::ostream &os) const {
  os << "kalman-model 1\n";
  os << "dofs " << dofs_.size();
  for (auto d : dofs_) {
    os << ' ' << d;
  }
  os << '\n';
  write_matrix(os, "A", A_);
  write_matrix(os, "W", W_);
  write_matrix(os, "H", H_);
  write_matrix(os, "Q", Q_);
  write_matrix(os, "baseline", Eigen::Map<const Matrix>(baseline_.data(), 1, kChannels));
  write_matrix(os, "dead_zone",
               Eigen::Map<const Matrix>(dead_zone_.data(), 1, static_cast<Eigen::Index>(dead_zone_.size())));
}

KalmanModel KalmanModel::read(std::istream &is) {
  LineReader in(is);
  {
    auto magic = in.next("header");
    std::string tag;
    int version = 0;
    if (!(magic >> tag >> version) || tag != "kalman-model" || version != 1) {
      throw FormatError(in.line(), "not a kalman-model v1 file");
    }
  }
  std::vector<std::size_t> dofs;
  {
    auto line = in.next("dofs");
    std::string tag;
    std::size_t n = 0;
    if (!(line >> tag >> n) || tag != "dofs" || n == 0 || n > kDofs) {
      throw FormatError(in.line(), "expected 'dofs <k> <indices...>'");
    }
    dofs.resize(n);
    for (auto &d : dofs) {
      if (!(line >> d) || d >= kDofs) {
        throw FormatError(in.line(), "bad DOF index");
      }
    }
  }
  Matrix A = read_matrix(in, "A");
  Matrix W = read_matrix(in, "W");
  Matrix H = read_matrix(in, "H");
  Matrix Q = read_matrix(in, "Q");
  const Matrix b = read_matrix(in, "baseline");
  const Matrix dz = read_matrix(in, "dead_zone");
  for (const Matrix *m : std::initializer_list<const Matrix *>{&A, &W, &H, &Q, &b, &dz}) {
    if (!m->allFinite()) {
      throw FormatError(in.line(), "model contains non-finite values");
    }
  }
  if (b.rows() != 1 || b.cols() != static_cast<Eigen::Index>(kChannels) || dz.rows() != 1) {
    throw FormatError(in.line(), "baseline or dead_zone has the wrong shape");
  }
  try {
    KalmanModel model(std::move(A), std::move(W), std::move(H), std::move(Q), std::move(dofs));
    dsp::BaselineVector base{};
    for (std::size_t c = 0; c < kChannels; ++c) {
      base[c] = b(0, static_cast<Eigen::Index>(c));
    }
    model.set_baseline(base);
    model.set_dead_zone(std::vector<double>(dz.data(), dz.data() + dz.size()));
    return model;
  } catch (const std::invalid_argument &e) {
    throw FormatError(in.line(), e.what());
  }
}

KalmanModel train(const Matrix &features, const Matrix &kinematics, const TrainOptions &options,
                  std::span<const std::size_t> frame_index, std::vector<std::size_t> dofs) {
  const auto n = features.rows();
  const auto k = kinematics.cols();
  if (kinematics.rows() != n) {
    throw std::invalid_argument("features and kinematics have different lengths");
  }
  if (features.cols() != static_cast<Eigen::Index>(kChannels)) {
    throw std::invalid_argument("training features must have 21 columns");
  }
  if (k < 1) {
    throw std::invalid_argument("at least one DOF is required");
  }
  if (static_cast<std::size_t>(n) < min_training_rows(static_cast<std::size_t>(k))) {
    throw std::invalid_argument("need at least " +
                                std::to_string(min_training_rows(static_cast<std::size_t>(k))) +
                                " training frames, got " + std::to_string(n));
  }
  if (!frame_index.empty() && frame_index.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("frame index length does not match training data");
  }
  check_finite(features, "features");
  check_finite(kinematics, "kinematics");
  if (kinematics.cwiseAbs().maxCoeff() > 1.0) {
    throw std::invalid_argument("training kinematics must lie in [-1, 1]");
  }

  // State transitions between timeline-adjacent rows.
  std::vector<Eigen::Index> prev, next;
  for (Eigen::Index t = 1; t < n; ++t) {
    const bool adjacent =
        frame_index.empty() || frame_index[static_cast<std::size_t>(t)] ==
                                   frame_index[static_cast<std::size_t>(t - 1)] + 1;
    if (adjacent) {
      prev.push_back(t - 1);
      next.push_back(t);
    }
  }
  if (prev.empty()) {
    throw std::invalid_argument("training data has no adjacent frame pairs");
  }
  const Matrix X0 = kinematics(prev, Eigen::all);
  const Matrix X1 = kinematics(next, Eigen::all);

  const Matrix A = least_squares(X0, X1, options, "state transition").transpose();
  const Matrix W = residual_covariance(X1 - X0 * A.transpose());
  const Matrix H = least_squares(kinematics, features, options, "observation model").transpose();
  const Matrix Q = residual_covariance(features - kinematics * H.transpose());

  return KalmanModel(A, with_jitter(W), H, with_jitter(Q), std::move(dofs));
}

} // namespace myo::decoder
