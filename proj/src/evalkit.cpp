// SPDX-License-Identifier: Apache-2.0
#include "myo/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "myo/dsp.hpp"

namespace myo::evalkit {

// ---------------------------------------------------------------------------
// SNR

std::string_view to_string(MovementClass c) {
  switch (c) {
  case MovementClass::Digits: return "digits";
  case MovementClass::Grasp: return "grasp";
  case MovementClass::Wrist: return "wrist";
  }
  return "digits";
}

MovementClass parse_movement_class(std::string_view s) {
  if (s == "digits") return MovementClass::Digits;
  if (s == "grasp") return MovementClass::Grasp;
  if (s == "wrist") return MovementClass::Wrist;
  throw std::invalid_argument("unknown movement class '" + std::string(s) + "'");
}

namespace {

std::pair<double, double> mean_and_sd(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return {mean, std::sqrt(ss / (n - 1.0))};
}

} // namespace

SnrReport snr(std::span<const double> movement_mav, std::span<const double> rest_mav,
              MovementClass movement_class) {
  if (movement_mav.size() != rest_mav.size() || movement_mav.empty()) {
    throw std::invalid_argument("movement and rest MAV must be non-empty and the same length");
  }
  SnrReport r;
  r.movement_class = movement_class;
  for (std::size_t e = 0; e < movement_mav.size(); ++e) {
    if (!(rest_mav[e] > kRestEpsilon)) {
      throw std::invalid_argument("degenerate rest MAV on electrode " + std::to_string(e));
    }
    r.values.push_back(movement_mav[e] / rest_mav[e]);
  }
  std::tie(r.mean, r.sd) = mean_and_sd(r.values);
  return r;
}

// ---------------------------------------------------------------------------
// RMSE

CellMask intended_mask(const Trace &actual) {
  CellMask mask(actual.size());
  for (std::size_t t = 0; t < actual.size(); ++t) {
    mask[t].resize(actual[t].size());
    for (std::size_t d = 0; d < actual[t].size(); ++d) {
      mask[t][d] = actual[t][d] != 0.0;
    }
  }
  return mask;
}

RmseEntry rmse(const Trace &predicted, const Trace &actual, const CellMask &intended) {
  if (predicted.size() != actual.size() || intended.size() != actual.size()) {
    throw std::invalid_argument("RMSE inputs are not aligned");
  }
  double sse_in = 0.0;
  double sse_out = 0.0;
  RmseEntry r;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    if (predicted[t].size() != actual[t].size() || intended[t].size() != actual[t].size()) {
      throw std::invalid_argument("RMSE inputs differ in DOF count at frame " + std::to_string(t));
    }
    for (std::size_t d = 0; d < actual[t].size(); ++d) {
      const double e = predicted[t][d] - actual[t][d];
      if (intended[t][d]) {
        sse_in += e * e;
        ++r.intended_cells;
      } else {
        sse_out += e * e;
        ++r.unintended_cells;
      }
    }
  }
  if (r.intended_cells) {
    r.intended = std::sqrt(sse_in / static_cast<double>(r.intended_cells));
  }
  if (r.unintended_cells) {
    r.unintended = std::sqrt(sse_out / static_cast<double>(r.unintended_cells));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Split

Split split_50_50(std::size_t frames, std::uint64_t seed) {
  std::vector<std::size_t> order(frames);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = frames; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const std::size_t n_train = frames - frames / 2;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// ---------------------------------------------------------------------------
// Sweep

void DecodingSession::validate() const {
  if (kinematics.size() != features.size() || labels.size() != features.size()) {
    throw std::invalid_argument("session features, kinematics and labels differ in length");
  }
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) {
    return out;
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) {
      --i;
    }
    if (i == 0) {
      break;
    }
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) {
      idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

namespace {

bool only_subset_moves(const Kinematics &k, std::span<const std::size_t> dofs) {
  for (std::size_t d = 0; d < kDofs; ++d) {
    if (k[d] != 0.0 && std::find(dofs.begin(), dofs.end(), d) == dofs.end()) {
      return false;
    }
  }
  return true;
}

} // namespace

RmseEntry evaluate_subset(const DecodingSession &session, const Split &split,
                          std::span<const std::size_t> dofs, const decoder::TrainOptions &options) {
  session.validate();
  if (dofs.empty()) {
    throw std::invalid_argument("DOF subset is empty");
  }
  auto keep = [&](const std::vector<std::size_t> &idx) {
    std::vector<std::size_t> out;
    for (std::size_t i : idx) {
      if (only_subset_moves(session.kinematics[i], dofs)) {
        out.push_back(i);
      }
    }
    return out;
  };
  const std::vector<std::size_t> train_idx = keep(split.train);
  const std::vector<std::size_t> test_idx = keep(split.test);

  std::vector<FeatureFrame> train_features;
  std::vector<bool> rest;
  for (std::size_t i : train_idx) {
    train_features.push_back(session.features[i]);
    rest.push_back(session.labels[i] == 0);
  }
  const dsp::BaselineVector baseline = dsp::estimate_baseline(train_features, rest);

  const auto k = static_cast<Eigen::Index>(dofs.size());
  decoder::Matrix Z(static_cast<Eigen::Index>(train_idx.size()), static_cast<Eigen::Index>(kChannels));
  decoder::Matrix X(static_cast<Eigen::Index>(train_idx.size()), k);
  for (std::size_t r = 0; r < train_idx.size(); ++r) {
    const auto &f = session.features[train_idx[r]];
    for (std::size_t c = 0; c < kChannels; ++c) {
      Z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f.mav[c] - baseline[c];
    }
    for (Eigen::Index d = 0; d < k; ++d) {
      X(static_cast<Eigen::Index>(r), d) = session.kinematics[train_idx[r]][dofs[static_cast<std::size_t>(d)]];
    }
  }
  decoder::KalmanModel model = decoder::train(Z, X, options, train_idx,
                                              std::vector<std::size_t>(dofs.begin(), dofs.end()));
  model.set_baseline(baseline);

  Trace predicted, actual;
  for (std::size_t i : test_idx) {
    const FeatureFrame corrected = dsp::subtract_baseline(session.features[i], baseline);
    predicted.push_back(model.predict_step(corrected));
    std::vector<double> target;
    for (std::size_t d : dofs) {
      target.push_back(session.kinematics[i][d]);
    }
    actual.push_back(std::move(target));
  }
  return rmse(predicted, actual, intended_mask(actual));
}

SweepRow dof_sweep(const DecodingSession &session, int k, std::uint64_t seed,
                   const SweepOptions &options) {
  if (k < 1 || k > static_cast<int>(kDofs)) {
    throw std::invalid_argument("k must lie in 1..6");
  }
  session.validate();
  const Split split = split_50_50(session.frames(), seed);
  const auto subsets = combinations(kDofs, static_cast<std::size_t>(k));

  SweepRow row;
  row.k = k;
  row.subsets = subsets.size();
  row.detail.resize(subsets.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < subsets.size(); i = next++) {
      try {
        row.detail[i] = {subsets[i], evaluate_subset(session, split, subsets[i], options.train)};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  const std::size_t threads =
      options.parallel ? std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, subsets.size())
                       : 1;
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  double sum_in = 0.0, sum_out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (const auto &s : row.detail) {
    if (s.rmse.intended) {
      sum_in += *s.rmse.intended;
      ++n_in;
    }
    if (s.rmse.unintended) {
      sum_out += *s.rmse.unintended;
      ++n_out;
    }
  }
  if (n_in) row.rmse_intended = sum_in / static_cast<double>(n_in);
  if (n_out) row.rmse_unintended = sum_out / static_cast<double>(n_out);
  return row;
}

// ---------------------------------------------------------------------------
// TOST

namespace {

struct Moments {
  std::size_t n;
  double mean;
  double sd;
  double se;
};

Moments moments(std::span<const double> diffs) {
  if (diffs.size() < 2) {
    throw std::invalid_argument("equivalence test needs at least two paired differences");
  }
  for (double d : diffs) {
    if (!std::isfinite(d)) {
      throw std::invalid_argument("paired differences must be finite");
    }
  }
  const auto [mean, sd] = mean_and_sd(diffs);
  return {diffs.size(), mean, sd, sd / std::sqrt(static_cast<double>(diffs.size()))};
}

} // namespace

OneSidedTest one_sided_upper(std::span<const double> diffs, double margin) {
  const Moments m = moments(diffs);
  if (m.se == 0.0) {
    return {m.mean < margin ? -INFINITY : INFINITY, m.mean < margin ? 0.0 : 1.0};
  }
  const double t = (m.mean - margin) / m.se;
  return {t, student_t_cdf(t, static_cast<double>(m.n - 1))};
}

OneSidedTest one_sided_lower(std::span<const double> diffs, double margin) {
  const Moments m = moments(diffs);
  if (m.se == 0.0) {
    return {m.mean > margin ? INFINITY : -INFINITY, m.mean > margin ? 0.0 : 1.0};
  }
  const double t = (m.mean - margin) / m.se;
  return {t, student_t_cdf(-t, static_cast<double>(m.n - 1))};
}

TostResult tost_min_bounds(std::span<const double> paired_diffs, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  }
  const Moments m = moments(paired_diffs);
  TostResult r;
  r.n = m.n;
  r.df = static_cast<double>(m.n - 1);
  r.mean_diff = m.mean;
  r.sd_diff = m.sd;
  r.alpha = alpha;
  r.t_critical = student_t_quantile(1.0 - alpha, r.df);
  const double half_width = r.t_critical * m.se;
  r.lower_bound = m.mean - half_width;
  r.upper_bound = m.mean + half_width;
  return r;
}

double percent_equivalence(double bound, double reference_mean) {
  if (reference_mean == 0.0 || !std::isfinite(reference_mean)) {
    throw std::invalid_argument("reference mean must be finite and nonzero");
  }
  return 100.0 * bound / reference_mean;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string opt_num(const std::optional<double> &v) { return v ? num(*v) : "NA"; }

} // namespace

void write_snr(std::ostream &os, const SnrReport &r) {
  os << "electrode,snr\n";
  for (std::size_t e = 0; e < r.values.size(); ++e) {
    os << e << ',' << num(r.values[e]) << '\n';
  }
  os << "# class " << to_string(r.movement_class) << " mean " << num(r.mean) << " sd "
     << num(r.sd) << '\n';
}

void write_rmse(std::ostream &os, const RmseEntry &r) {
  os << "rmse_intended,rmse_unintended,intended_cells,unintended_cells\n"
     << opt_num(r.intended) << ',' << opt_num(r.unintended) << ',' << r.intended_cells << ','
     << r.unintended_cells << '\n';
}

void write_tost(std::ostream &os, const TostResult &r) {
  os << "n,mean_diff,sd_diff,t_critical,lower_bound,upper_bound,alpha\n"
     << r.n << ',' << num(r.mean_diff) << ',' << num(r.sd_diff) << ',' << num(r.t_critical) << ','
     << num(r.lower_bound) << ',' << num(r.upper_bound) << ',' << r.alpha << '\n';
}

void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows) {
  os << "k,subsets,rmse_intended,rmse_unintended\n";
  for (const auto &r : rows) {
    os << r.k << ',' << r.subsets << ',' << opt_num(r.rmse_intended) << ','
       << opt_num(r.rmse_unintended) << '\n';
  }
}

} // namespace myo::evalkit
