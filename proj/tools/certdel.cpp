// certdel — command-line driver for the certified-deletion simulator.
//
// Subcommands: session, threshold-table, detection-matrix, attack-sweep,
// render-modes. All randomness flows from an explicit --seed; repeated runs
// with the same flags produce byte-identical outputs.
//
// Exit codes: 0 success, 1 runtime error, 2 verification rejected (delete
// sessions), 64 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "certdel/adversary.hpp"
#include "certdel/analysis.hpp"
#include "certdel/channel.hpp"
#include "certdel/protocol.hpp"
#include "certdel/qudit.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitRejected = 2;
constexpr int kExitUsage = 64;

void write_output(const std::optional<std::string>& path, const std::string& content) {
  if (!path || path->empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + *path);
  out << content;
}

struct SessionConfig {
  int d = 2;
  int n_rounds = 10000;
  double message_fraction = 0.5;
  std::optional<double> delta;
  std::string channel_spec = "identity";
  std::string behavior = "read";
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

int cmd_session(const SessionConfig& config) {
  certdel::ProtocolParams params;
  params.dimension = config.d;
  params.n_rounds = config.n_rounds;
  params.message_fraction = config.message_fraction;
  params.delta = config.delta ? *config.delta
                              : certdel::ProtocolParams::default_delta(config.d);
  params.seed = config.seed;
  params.validate();
  const certdel::ChannelModel channel =
      certdel::parse_channel_spec(config.channel_spec, config.d);
  const certdel::BobBehavior behavior = config.behavior == "delete"
                                            ? certdel::BobBehavior::Delete
                                            : certdel::BobBehavior::Read;

  // message symbols drawn from their own substream of the session seed
  certdel::Rng message_rng = certdel::Rng(params.seed).fork(2);
  std::vector<int> message(static_cast<std::size_t>(params.message_count()));
  for (int& s : message) {
    s = static_cast<int>(message_rng.uniform_index(static_cast<std::size_t>(config.d)));
  }

  const certdel::SessionReport report =
      certdel::run_session(params, message, channel, behavior);
  write_output(config.out, certdel::session_report_to_json(report).dump(2) + "\n");
  if (behavior == certdel::BobBehavior::Delete && report.accepted &&
      !*report.accepted) {
    return kExitRejected;
  }
  return kExitSuccess;
}

struct ThresholdConfig {
  std::vector<int> dims;
  std::optional<std::string> out;
};

int cmd_threshold_table(const ThresholdConfig& config) {
  std::ostringstream csv;
  csv << "d,F_star,Q_star_percent\n";
  char line[96];
  for (int d : config.dims) {
    const certdel::FidelityThreshold threshold = certdel::fidelity_threshold(d);
    std::snprintf(line, sizeof(line), "%d,%.6f,%.2f\n", d, threshold.fidelity,
                  100.0 * threshold.qber);
    csv << line;
  }
  write_output(config.out, csv.str());
  return kExitSuccess;
}

struct DetectionConfig {
  int d = 2;
  std::string channel_spec = "identity";
  int trials = 100000;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<std::string> summary;
  int jobs = 1;
};

int cmd_detection_matrix(const DetectionConfig& config) {
  const certdel::ChannelModel channel =
      certdel::parse_channel_spec(config.channel_spec, config.d);
  certdel::Rng rng(config.seed);
  const certdel::DetectionMatrix matrix = certdel::estimate_detection_matrix(
      config.d, channel, config.trials, rng, config.jobs);
  std::ostringstream csv;
  certdel::write_detection_matrix_csv(matrix, csv);
  write_output(config.out, csv.str());

  const nlohmann::json summary{
      {"d", config.d},
      {"trials_per_cell", config.trials},
      {"qber_computational",
       certdel::qber_from_matrix(matrix, certdel::BasisRole::Computational)},
      {"qber_hadamard", certdel::qber_from_matrix(matrix, certdel::BasisRole::Hadamard)},
  };
  write_output(config.summary, summary.dump(2) + "\n");
  return kExitSuccess;
}

struct SweepConfig {
  int d = 2;
  std::string strategy = "split";
  std::vector<double> grid;
  std::string channel_spec = "identity";
  int n_rounds = 1000;
  double message_fraction = 0.5;
  std::optional<double> delta;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  int jobs = 1;
};

std::vector<certdel::AttackStrategy> build_strategies(const SweepConfig& config) {
  std::vector<certdel::AttackStrategy> strategies;
  if (config.strategy == "honest" || config.strategy == "read") {
    if (!config.grid.empty()) {
      throw std::invalid_argument("--grid only applies to split/rotated strategies");
    }
    if (config.strategy == "honest") {
      strategies.emplace_back(certdel::HonestDeleteStrategy{});
    } else {
      strategies.emplace_back(certdel::ReadAllComputationalStrategy{});
    }
    return strategies;
  }
  if (config.grid.empty()) {
    throw std::invalid_argument("strategy grid must not be empty");
  }
  for (double value : config.grid) {
    if (config.strategy == "split") {
      if (value < 0.0 || value > 1.0) {
        throw std::invalid_argument("split fractions must be in [0, 1]");
      }
      strategies.emplace_back(certdel::SplitSubsetStrategy{value});
    } else if (config.strategy == "rotated") {
      if (config.d != 2) {
        throw std::invalid_argument("rotated strategy requires --d 2");
      }
      strategies.emplace_back(certdel::RotatedBasisStrategy{value});
    } else {
      throw std::invalid_argument("unknown strategy: " + config.strategy);
    }
  }
  return strategies;
}

int cmd_attack_sweep(const SweepConfig& config) {
  const std::vector<certdel::AttackStrategy> strategies = build_strategies(config);
  certdel::ProtocolParams params;
  params.dimension = config.d;
  params.n_rounds = config.n_rounds;
  params.message_fraction = config.message_fraction;
  params.delta = config.delta ? *config.delta
                              : certdel::ProtocolParams::default_delta(config.d);
  params.seed = config.seed;
  params.validate();
  const certdel::ChannelModel channel =
      certdel::parse_channel_spec(config.channel_spec, config.d);

  certdel::Rng rng(config.seed);
  const std::vector<certdel::AttackReport> reports = certdel::tradeoff_sweep(
      strategies, params, channel, config.trials, rng, config.jobs);
  std::ostringstream csv;
  certdel::write_sweep_csv(strategies, reports, csv);
  write_output(config.out, csv.str());
  return kExitSuccess;
}

struct RenderConfig {
  int d = 2;
  std::string basis = "computational";
  int grid = 101;
  double extent = 3.0;
  std::string outdir;
};

int cmd_render_modes(const RenderConfig& config) {
  const certdel::BasisSet basis = config.basis == "hadamard"
                                      ? certdel::hadamard_basis(config.d)
                                      : certdel::computational_basis(config.d);
  std::filesystem::create_directories(config.outdir);
  for (int k = 0; k < basis.dimension(); ++k) {
    const certdel::ModeField field = certdel::sample_mode_field(
        basis.state(k), basis.labels(), config.grid, config.extent);
    const std::filesystem::path path =
        std::filesystem::path(config.outdir) /
        ("mode_" + certdel::to_string(basis.role()) + std::to_string(k) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    certdel::write_mode_field_csv(field, out);
  }
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-dimensional certified-deletion protocol simulator"};
  app.require_subcommand(1);

  SessionConfig session;
  CLI::App* session_cmd = app.add_subcommand("session", "run one protocol session");
  session_cmd->add_option("--d", session.d, "qudit dimension")->required();
  session_cmd->add_option("--n-rounds", session.n_rounds, "qudits per session");
  session_cmd->add_option("--message-fraction", session.message_fraction,
                          "fraction of rounds carrying message symbols");
  session_cmd->add_option("--delta", session.delta,
                          "verification error budget (default: half the zero-rate "
                          "QBER threshold)");
  session_cmd->add_option("--channel", session.channel_spec,
                          "identity | uniform:F=<f> | loss:p=<p> | "
                          "rotation:file=<path> | intercept:basis=<name>");
  session_cmd->add_option("--behavior", session.behavior, "read | delete")
      ->check(CLI::IsMember({"read", "delete"}));
  session_cmd->add_option("--seed", session.seed, "rng seed")->required();
  session_cmd->add_option("--out", session.out, "report path (default: stdout)");

  ThresholdConfig threshold;
  CLI::App* threshold_cmd =
      app.add_subcommand("threshold-table", "zero-rate QBER thresholds per dimension");
  threshold_cmd->add_option("--d", threshold.dims, "dimensions (comma separated)")
      ->required()
      ->delimiter(',');
  threshold_cmd->add_option("--out", threshold.out, "CSV path (default: stdout)");

  DetectionConfig detection;
  CLI::App* detection_cmd = app.add_subcommand(
      "detection-matrix", "Monte Carlo probability-of-detection matrix");
  detection_cmd->add_option("--d", detection.d, "qudit dimension")->required();
  detection_cmd->add_option("--channel", detection.channel_spec, "channel spec");
  detection_cmd->add_option("--trials", detection.trials, "trials per cell")
      ->check(CLI::PositiveNumber);
  detection_cmd->add_option("--seed", detection.seed, "rng seed")->required();
  detection_cmd->add_option("--out", detection.out, "matrix CSV path (default: stdout)");
  detection_cmd->add_option("--summary", detection.summary,
                            "QBER summary JSON path (default: stdout)");
  detection_cmd->add_option("--jobs", detection.jobs, "worker threads");

  SweepConfig sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("attack-sweep", "malicious-receiver tradeoff curves");
  sweep_cmd->add_option("--d", sweep.d, "qudit dimension")->required();
  sweep_cmd->add_option("--strategy", sweep.strategy, "honest | read | split | rotated")
      ->check(CLI::IsMember({"honest", "read", "split", "rotated"}));
  sweep_cmd->add_option("--grid", sweep.grid,
                        "strategy parameters (split fractions or angles)")
      ->delimiter(',');
  sweep_cmd->add_option("--channel", sweep.channel_spec, "channel spec");
  sweep_cmd->add_option("--n-rounds", sweep.n_rounds, "qudits per session");
  sweep_cmd->add_option("--message-fraction", sweep.message_fraction,
                        "fraction of rounds carrying message symbols");
  sweep_cmd->add_option("--delta", sweep.delta, "verification error budget");
  sweep_cmd->add_option("--trials", sweep.trials, "sessions per grid point")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep.seed, "rng seed")->required();
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default: stdout)");
  sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads");

  RenderConfig render;
  CLI::App* render_cmd =
      app.add_subcommand("render-modes", "export transverse mode fields as CSV");
  render_cmd->add_option("--d", render.d, "qudit dimension")->required();
  render_cmd->add_option("--basis", render.basis, "computational | hadamard")
      ->check(CLI::IsMember({"computational", "hadamard"}));
  render_cmd->add_option("--grid", render.grid, "samples per side (>= 16)");
  render_cmd->add_option("--extent", render.extent, "half-width of the sampled square");
  render_cmd->add_option("--outdir", render.outdir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*session_cmd) return cmd_session(session);
    if (*threshold_cmd) return cmd_threshold_table(threshold);
    if (*detection_cmd) return cmd_detection_matrix(detection);
    if (*sweep_cmd) return cmd_attack_sweep(sweep);
    if (*render_cmd) return cmd_render_modes(render);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
