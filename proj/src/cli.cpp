// SPDX-License-Identifier: Apache-2.0
#include "myo/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "myo/datastore.hpp"
#include "myo/decoder.hpp"
#include "myo/error.hpp"
#include "myo/evalkit.hpp"
#include "myo/runtime.hpp"
#include "myo/synthemg.hpp"

namespace myo::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = kDefaultSeed;
  std::string filter = "lowcost";
  double alpha = 0.05;
  int k = 0; // 0: all
  std::string out;

  std::string session;
  std::string model;
  std::string schedule;
  std::string input;
  std::string movement_class = "digits";
  std::string dofs;
  double dead_zone = 0.0;
  int repetitions = 3;
  double seconds = 60.0;
  bool single_thread = false;
  bool paced = false;
  bool no_pace = false;
};

fs::path default_output(const Options &o, const char *name) {
  if (!o.out.empty()) {
    return o.out;
  }
  const char *dir = std::getenv(kOutDirEnv);
  return fs::path(dir && *dir ? dir : ".") / name;
}

void require_file(const std::string &path, const char *what) {
  if (path.empty()) {
    throw UsageError(std::string("missing --") + what);
  }
  if (!fs::exists(path)) {
    throw UsageError(std::string(what) + " file '" + path + "' does not exist");
  }
}

std::string read_text(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) {
    throw IoError("cannot open '" + p.string() + "'");
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Writes to a temporary sibling and renames, so failures leave no partial file.
void write_file(const fs::path &p, const std::function<void(std::ostream &)> &body) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw IoError("cannot open '" + p.string() + "' for writing");
    }
    body(os);
    if (!os) {
      throw IoError("failed while writing '" + p.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    throw IoError("cannot move output into place at '" + p.string() + "'");
  }
}

// Emits a report on stdout and, with --out, into that file as well.
void emit_report(const Options &o, std::ostream &out, const std::function<void(std::ostream &)> &body) {
  body(out);
  if (!o.out.empty()) {
    write_file(o.out, body);
  }
}

evalkit::DecodingSession to_decoding_session(const datastore::SessionLog &log) {
  evalkit::DecodingSession s;
  for (const auto &r : log.rows) {
    FeatureFrame f;
    f.t_ms = r.t_ms;
    f.mav = r.mav;
    s.features.push_back(f);
    s.kinematics.push_back(r.kin);
    s.labels.push_back(r.label);
  }
  return s;
}

std::vector<std::size_t> parse_dofs(const std::string &text) {
  std::vector<std::size_t> dofs;
  if (text.empty()) {
    for (std::size_t d = 0; d < kDofs; ++d) dofs.push_back(d);
    return dofs;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const unsigned long d = std::stoul(item, &pos);
    if (pos != item.size() || d >= kDofs) {
      throw UsageError("bad DOF index '" + item + "'");
    }
    dofs.push_back(d);
  }
  return dofs;
}

decoder::KalmanModel train_on_log(const datastore::SessionLog &log, const std::vector<std::size_t> &dofs,
                                  double dead_zone) {
  const auto session = to_decoding_session(log);
  std::vector<bool> rest;
  for (int l : session.labels) rest.push_back(l == synth::kRestLabel);
  const auto baseline = dsp::estimate_baseline(session.features, rest);

  const auto n = static_cast<Eigen::Index>(session.frames());
  decoder::Matrix Z(n, static_cast<Eigen::Index>(kChannels));
  decoder::Matrix X(n, static_cast<Eigen::Index>(dofs.size()));
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto &f = session.features[static_cast<std::size_t>(t)];
    for (std::size_t c = 0; c < kChannels; ++c) {
      Z(t, static_cast<Eigen::Index>(c)) = f.mav[c] - baseline[c];
    }
    for (std::size_t j = 0; j < dofs.size(); ++j) {
      X(t, static_cast<Eigen::Index>(j)) = session.kinematics[static_cast<std::size_t>(t)][dofs[j]];
    }
  }
  auto model = decoder::train(Z, X, {}, {}, dofs);
  model.set_baseline(baseline);
  model.set_dead_zone(std::vector<double>(dofs.size(), dead_zone));
  return model;
}

decoder::KalmanModel load_model(const std::string &path) {
  std::ifstream is(path);
  if (!is) {
    throw IoError("cannot open '" + path + "'");
  }
  return decoder::KalmanModel::read(is);
}

runtime::PipelineResult decode_session(const Options &o, const decoder::KalmanModel &model,
                                       dsp::FilterVariant variant) {
  const fs::path raw = datastore::raw_path(o.session);
  if (!fs::exists(raw)) {
    throw UsageError("session has no full-rate sidecar '" + raw.string() + "'");
  }
  auto frames = datastore::read_raw_stream(raw);
  const auto duration = static_cast<std::int64_t>(frames.size());
  runtime::ReplaySource source(std::move(frames));
  runtime::PipelineConfig config;
  config.filter = variant;
  config.threaded = !o.single_thread;
  config.wall_clock = o.paced;
  return runtime::run_pipeline(config, source, model, duration);
}

int cmd_synth(const Options &o, std::ostream &out) {
  synth::MovementSchedule schedule = synth::six_movement_schedule(o.repetitions);
  if (!o.schedule.empty()) {
    require_file(o.schedule, "schedule");
    schedule = synth::parse_schedule(read_text(o.schedule));
  }
  const auto profile = synth::make_profile(schedule);
  if (profile.frames() == 0) {
    throw UsageError("schedule produces an empty profile");
  }
  const fs::path dest = default_output(o, "session.csv");
  const auto log = runtime::record_training_session(profile, synth::SynergyModel::flexor_extensor(),
                                                    dsp::parse_filter_variant(o.filter), o.seed, dest);
  out << "wrote " << dest.string() << " (" << log.rows.size() << " rows)\n";
  return kOk;
}

int cmd_train(const Options &o, std::ostream &out) {
  require_file(o.session, "session");
  const auto log = datastore::read_session(o.session);
  const auto model = train_on_log(log, parse_dofs(o.dofs), o.dead_zone);
  const fs::path dest = default_output(o, "model.txt");
  write_file(dest, [&](std::ostream &os) { model.write(os); });
  out << "wrote " << dest.string() << '\n';
  return kOk;
}

int cmd_decode(const Options &o, std::ostream &out) {
  require_file(o.model, "model");
  require_file(o.session, "session");
  const auto model = load_model(o.model);
  const auto log = datastore::read_session(o.session);
  const auto result = decode_session(o, model, log.meta.filter);
  const fs::path dest = default_output(o, "trace.csv");
  write_file(dest, [&](std::ostream &os) { runtime::write_trace_csv(os, result, model.dofs()); });
  runtime::write_timing(out, result.timing);
  return kOk;
}

int cmd_eval(const Options &o, std::ostream &out) {
  require_file(o.model, "model");
  require_file(o.session, "session");
  const auto model = load_model(o.model);
  const auto log = datastore::read_session(o.session);
  const auto result = decode_session(o, model, log.meta.filter);
  evalkit::Trace actual;
  for (std::size_t i = 0; i < result.trace.size() && i < log.rows.size(); ++i) {
    std::vector<double> target;
    for (auto d : model.dofs()) target.push_back(log.rows[i].kin[d]);
    actual.push_back(std::move(target));
  }
  evalkit::Trace predicted(result.trace.begin(), result.trace.begin() + static_cast<std::ptrdiff_t>(actual.size()));
  const auto report = evalkit::rmse(predicted, actual, evalkit::intended_mask(actual));
  emit_report(o, out, [&](std::ostream &os) { evalkit::write_rmse(os, report); });
  return kOk;
}

int cmd_snr(const Options &o, std::ostream &out) {
  require_file(o.session, "session");
  const auto log = datastore::read_session(o.session);
  std::vector<double> move(kElectrodes, 0.0), rest(kElectrodes, 0.0);
  std::size_t n_move = 0, n_rest = 0;
  for (const auto &r : log.rows) {
    auto &acc = r.label == synth::kRestLabel ? rest : move;
    (r.label == synth::kRestLabel ? n_rest : n_move)++;
    for (std::size_t e = 0; e < kElectrodes; ++e) acc[e] += r.mav[e];
  }
  if (n_move == 0 || n_rest == 0) {
    throw UsageError("session needs both movement and rest rows");
  }
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    move[e] /= static_cast<double>(n_move);
    rest[e] /= static_cast<double>(n_rest);
  }
  const auto report = evalkit::snr(move, rest, evalkit::parse_movement_class(o.movement_class));
  emit_report(o, out, [&](std::ostream &os) { evalkit::write_snr(os, report); });
  return kOk;
}

std::vector<double> read_numbers(const std::string &path) {
  std::string text = read_text(path);
  std::vector<double> values;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char &c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception &) {
        pos = 0;
      }
      if (pos != tok.size()) {
        throw FormatError(line_no, "not a number: '" + tok + "'");
      }
      values.push_back(v);
    }
  }
  return values;
}

int cmd_tost(const Options &o, std::ostream &out) {
  require_file(o.input, "input");
  const auto diffs = read_numbers(o.input);
  const auto result = evalkit::tost_min_bounds(diffs, o.alpha);
  emit_report(o, out, [&](std::ostream &os) { evalkit::write_tost(os, result); });
  return kOk;
}

int cmd_sweep(const Options &o, std::ostream &out) {
  require_file(o.session, "session");
  const auto session = to_decoding_session(datastore::read_session(o.session));
  std::vector<evalkit::SweepRow> rows;
  for (int k = 1; k <= static_cast<int>(kDofs); ++k) {
    if (o.k != 0 && k != o.k) continue;
    rows.push_back(evalkit::dof_sweep(session, k, o.seed));
  }
  emit_report(o, out, [&](std::ostream &os) { evalkit::write_sweep_csv(os, rows); });
  return kOk;
}

int cmd_bench(const Options &o, std::ostream &out) {
  if (!(o.seconds > 0.0)) {
    throw UsageError("--seconds must be positive");
  }
  const auto variant = dsp::parse_filter_variant(o.filter);
  const auto synergy = synth::SynergyModel::flexor_extensor();
  const auto train_log = runtime::record_training_session(
      synth::make_profile(synth::six_movement_schedule(1)), synergy, variant, o.seed);
  const auto model = train_on_log(train_log, parse_dofs(""), 0.0);

  auto schedule = synth::six_movement_schedule(1);
  auto profile = synth::make_profile(schedule);
  const auto want = static_cast<std::size_t>(std::ceil(o.seconds * synth::kFrameRateHz));
  while (profile.frames() < want) {
    auto more = synth::make_profile(schedule);
    profile.trajectory.insert(profile.trajectory.end(), more.trajectory.begin(), more.trajectory.end());
    profile.segment_labels.insert(profile.segment_labels.end(), more.segment_labels.begin(),
                                  more.segment_labels.end());
  }
  runtime::SynthSource source(profile, synergy, o.seed + 1);
  runtime::PipelineConfig config;
  config.filter = variant;
  config.wall_clock = !o.no_pace;
  const auto result = runtime::run_pipeline(config, source, model,
                                            static_cast<std::int64_t>(o.seconds * 1000.0));
  emit_report(o, out, [&](std::ostream &os) { runtime::write_timing(os, result.timing); });
  return kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Myoelectric decoding pipeline and evaluation toolkit", "myoctl"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--seed", o.seed, "RNG seed (default 1)");
    sub->add_option("--out", o.out, "Output path");
  };
  auto add_filter = [&](CLI::App *sub) {
    sub->add_option("--filter", o.filter, "Filter chain: lowcost | research")
        ->check(CLI::IsMember({"lowcost", "low-cost", "research", "research-grade"}));
  };

  auto *synth_cmd = app.add_subcommand("synth", "Synthesize a training session");
  add_common(synth_cmd);
  add_filter(synth_cmd);
  synth_cmd->add_option("--schedule", o.schedule, "Movement schedule (key = value file)");
  synth_cmd->add_option("--reps", o.repetitions, "Repetitions of the six-movement default")
      ->check(CLI::NonNegativeNumber);

  auto *train_cmd = app.add_subcommand("train", "Train a Kalman decoder from a session");
  add_common(train_cmd);
  train_cmd->add_option("--session", o.session, "Session CSV");
  train_cmd->add_option("--dofs", o.dofs, "Comma-separated DOF indices (default all six)");
  train_cmd->add_option("--dead-zone", o.dead_zone, "Output dead-zone threshold")
      ->check(CLI::NonNegativeNumber);

  auto *decode_cmd = app.add_subcommand("decode", "Replay a session through the real-time pipeline");
  add_common(decode_cmd);
  decode_cmd->add_option("--model", o.model, "Model file");
  decode_cmd->add_option("--session", o.session, "Session CSV (with .raw sidecar)");
  decode_cmd->add_flag("--single-thread", o.single_thread, "Run producer and consumer inline");
  decode_cmd->add_flag("--paced", o.paced, "Pace the replay at 1 kHz wall time");

  auto *eval_cmd = app.add_subcommand("eval", "Intended/unintended RMSE of a model on a session");
  add_common(eval_cmd);
  eval_cmd->add_option("--model", o.model, "Model file");
  eval_cmd->add_option("--session", o.session, "Session CSV (with .raw sidecar)");

  auto *snr_cmd = app.add_subcommand("snr", "Per-electrode SNR of a session");
  add_common(snr_cmd);
  snr_cmd->add_option("--session", o.session, "Session CSV");
  snr_cmd->add_option("--class", o.movement_class, "digits | grasp | wrist")
      ->check(CLI::IsMember({"digits", "grasp", "wrist"}));

  auto *tost_cmd = app.add_subcommand("tost", "Minimum TOST equivalence bounds");
  add_common(tost_cmd);
  tost_cmd->add_option("--input", o.input, "File of paired differences");
  tost_cmd->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(1e-12, 0.4999999));

  auto *sweep_cmd = app.add_subcommand("sweep", "RMSE over all DOF combinations, k = 1..6");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--session", o.session, "Session CSV");
  sweep_cmd->add_option("--k", o.k, "Only this number of DOFs (default 1..6)")->check(CLI::Range(1, 6));

  auto *bench_cmd = app.add_subcommand("bench", "Wall-clock timing of the control loop");
  add_common(bench_cmd);
  add_filter(bench_cmd);
  bench_cmd->add_option("--seconds", o.seconds, "Stream duration");
  bench_cmd->add_flag("--no-pace", o.no_pace, "Run as fast as possible");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "myoctl: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (decode_cmd->parsed()) return cmd_decode(o, out);
    if (eval_cmd->parsed()) return cmd_eval(o, out);
    if (snr_cmd->parsed()) return cmd_snr(o, out);
    if (tost_cmd->parsed()) return cmd_tost(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (bench_cmd->parsed()) return cmd_bench(o, out);
  } catch (const UsageError &e) {
    err << "myoctl: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument &e) {
    err << "myoctl: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError &e) {
    err << "myoctl: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError &e) {
    err << "myoctl: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

} // namespace myo::cli
