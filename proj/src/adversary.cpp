#include "certdel/adversary.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "certdel/analysis.hpp"
#include "certdel/parallel.hpp"

namespace certdel {

namespace {

enum class ReadKind { Computational, Hadamard, Other };

// The intermediate d=2 basis: angle 0 aligns with the computational basis,
// pi/4 with the Hadamard one (up to phases).
BasisSet rotated_basis(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<QuditState> states;
  states.emplace_back(std::vector<Complex>{Complex{c, 0.0}, Complex{0.0, s}});
  states.emplace_back(std::vector<Complex>{Complex{s, 0.0}, Complex{0.0, -c}});
  return BasisSet(std::move(states), BasisRole::Hadamard, OamLabelMap(2));
}

struct Tally {
  long long accepted = 0;
  long long hits = 0;
  long long message_samples = 0;
  std::vector<long long> joint;  // d x d counts of (alice symbol, bob guess)

  void merge(const Tally& other) {
    accepted += other.accepted;
    hits += other.hits;
    message_samples += other.message_samples;
    for (std::size_t i = 0; i < joint.size(); ++i) joint[i] += other.joint[i];
  }
};

}  // namespace

std::string strategy_name(const AttackStrategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HonestDeleteStrategy>) return "honest";
        else if constexpr (std::is_same_v<T, ReadAllComputationalStrategy>) return "read";
        else if constexpr (std::is_same_v<T, SplitSubsetStrategy>) return "split";
        else if constexpr (std::is_same_v<T, RotatedBasisStrategy>) return "rotated";
        else return "fixed";
      },
      strategy);
}

std::optional<double> strategy_parameter(const AttackStrategy& strategy) {
  if (const auto* split = std::get_if<SplitSubsetStrategy>(&strategy)) {
    return split->read_fraction;
  }
  if (const auto* rotated = std::get_if<RotatedBasisStrategy>(&strategy)) {
    return rotated->angle;
  }
  return std::nullopt;
}

AttackReport run_attack(const AttackStrategy& strategy, const ProtocolParams& params,
                        const ChannelModel& channel, int trials, Rng& rng, int jobs) {
  params.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (channel.dimension() != params.dimension) {
    throw std::invalid_argument("channel dimension does not match");
  }
  const int d = params.dimension;

  if (const auto* split = std::get_if<SplitSubsetStrategy>(&strategy)) {
    if (!(split->read_fraction >= 0.0) || !(split->read_fraction <= 1.0)) {
      throw std::invalid_argument("split fraction must be in [0, 1]");
    }
  }
  if (std::holds_alternative<RotatedBasisStrategy>(strategy) && d != 2) {
    throw std::invalid_argument("rotated-basis attacks are defined for d = 2 only");
  }
  if (const auto* fixed = std::get_if<FixedBasisStrategy>(&strategy)) {
    if (fixed->basis.dimension() != d) {
      throw std::invalid_argument("fixed basis dimension does not match");
    }
  }

  const BasisSet comp = computational_basis(d);
  const BasisSet had = hadamard_basis(d);
  const BasisSet* fixed_like = nullptr;  // single basis used for every round
  ReadKind fixed_kind = ReadKind::Other;
  if (std::holds_alternative<HonestDeleteStrategy>(strategy)) {
    fixed_like = &had;
    fixed_kind = ReadKind::Hadamard;
  } else if (std::holds_alternative<ReadAllComputationalStrategy>(strategy)) {
    fixed_like = &comp;
    fixed_kind = ReadKind::Computational;
  } else if (const auto* fixed = std::get_if<FixedBasisStrategy>(&strategy)) {
    fixed_like = &fixed->basis;
    fixed_kind = ReadKind::Other;
  }
  std::optional<BasisSet> rotated;
  if (const auto* rot = std::get_if<RotatedBasisStrategy>(&strategy)) {
    rotated.emplace(rotated_basis(rot->angle));
    fixed_like = &*rotated;
    fixed_kind = ReadKind::Other;
  }
  const SplitSubsetStrategy* split = std::get_if<SplitSubsetStrategy>(&strategy);

  const int n = params.n_rounds;
  const int m = params.message_count();
  const int worker_count = std::max(1, std::min(jobs, trials));
  std::vector<Tally> tallies(static_cast<std::size_t>(worker_count));
  for (Tally& t : tallies) t.joint.assign(static_cast<std::size_t>(d) * d, 0);

  parallel_for(worker_count, jobs, [&](int worker) {
    Tally& tally = tallies[static_cast<std::size_t>(worker)];
    for (int trial = worker; trial < trials; trial += worker_count) {
      Rng trial_rng = rng.fork(static_cast<std::uint64_t>(trial));
      Rng message_rng = trial_rng.fork(0);
      std::vector<int> message(static_cast<std::size_t>(m));
      for (int& s : message) {
        s = static_cast<int>(message_rng.uniform_index(static_cast<std::size_t>(d)));
      }
      Rng prep_rng = trial_rng.fork(1);
      auto [record, states] = alice_prepare(params, message, prep_rng);

      DeletionCertificate cert;
      cert.outcomes.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        Rng round_rng = trial_rng.fork(2 + static_cast<std::uint64_t>(i));
        ReadKind kind = fixed_kind;
        const BasisSet* basis = fixed_like;
        if (split != nullptr) {
          const bool read = round_rng.uniform() < split->read_fraction;
          kind = read ? ReadKind::Computational : ReadKind::Hadamard;
          basis = read ? &comp : &had;
        }
        const TransmissionResult sent = transmit(states[static_cast<std::size_t>(i)],
                                                 channel, round_rng);
        const std::optional<Outcome> outcome = measure_received(sent, *basis, round_rng);
        if (!outcome) {
          cert.outcomes[static_cast<std::size_t>(i)] = std::nullopt;
          continue;
        }
        // a computational read carries no key information, so a uniform
        // symbol forges just as well as any function of the outcome
        cert.outcomes[static_cast<std::size_t>(i)] =
            kind == ReadKind::Computational
                ? static_cast<int>(round_rng.uniform_index(static_cast<std::size_t>(d)))
                : outcome->index;
        if (record.basis_choice[static_cast<std::size_t>(i)] == BasisRole::Computational) {
          const int guess =
              kind == ReadKind::Hadamard
                  ? static_cast<int>(round_rng.uniform_index(static_cast<std::size_t>(d)))
                  : outcome->index;
          const int symbol = record.symbols[static_cast<std::size_t>(i)];
          ++tally.message_samples;
          if (guess == symbol) ++tally.hits;
          ++tally.joint[static_cast<std::size_t>(symbol) * d + guess];
        }
      }
      try {
        if (alice_verify(record, cert, params.delta).accepted) ++tally.accepted;
      } catch (const std::runtime_error&) {
        // nothing comparable (all key rounds lost): not an accepted deletion
      }
    }
  });

  Tally total;
  total.joint.assign(static_cast<std::size_t>(d) * d, 0);
  for (const Tally& t : tallies) total.merge(t);

  AttackReport report;
  report.trials = trials;
  report.message_samples = total.message_samples;
  report.certificate_acceptance_rate = static_cast<double>(total.accepted) / trials;
  if (total.message_samples > 0) {
    report.message_symbol_hit_rate =
        static_cast<double>(total.hits) / static_cast<double>(total.message_samples);
    report.empirical_mutual_information_bits =
        mutual_information(joint_from_counts(d, total.joint));
    report.miller_madow_bias_bits =
        static_cast<double>((d - 1) * (d - 1)) /
        (2.0 * static_cast<double>(total.message_samples) * std::numbers::ln2);
  }
  return report;
}

std::vector<AttackReport> tradeoff_sweep(const std::vector<AttackStrategy>& strategies,
                                         const ProtocolParams& params,
                                         const ChannelModel& channel, int trials,
                                         Rng& rng, int jobs) {
  if (strategies.empty()) throw std::invalid_argument("empty strategy grid");
  std::vector<AttackReport> reports;
  reports.reserve(strategies.size());
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    Rng point_rng = rng.fork(static_cast<std::uint64_t>(k));
    reports.push_back(run_attack(strategies[k], params, channel, trials, point_rng, jobs));
  }
  return reports;
}

nlohmann::json attack_report_to_json(const AttackStrategy& strategy,
                                     const AttackReport& report) {
  nlohmann::json j{
      {"strategy", strategy_name(strategy)},
      {"certificate_acceptance_rate", report.certificate_acceptance_rate},
      {"message_symbol_hit_rate", report.message_symbol_hit_rate},
      {"empirical_mutual_information_bits", report.empirical_mutual_information_bits},
      {"miller_madow_bias_bits", report.miller_madow_bias_bits},
      {"trials", report.trials},
      {"message_samples", report.message_samples},
  };
  const std::optional<double> parameter = strategy_parameter(strategy);
  j["parameter"] = parameter ? nlohmann::json(*parameter) : nlohmann::json(nullptr);
  return j;
}

void write_sweep_csv(const std::vector<AttackStrategy>& strategies,
                     const std::vector<AttackReport>& reports, std::ostream& out) {
  if (strategies.size() != reports.size()) {
    throw std::invalid_argument("strategy/report count mismatch");
  }
  out << "strategy,parameter,acceptance_rate,hit_rate,mi_bits,mi_bias_bits,trials\n";
  char line[256];
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const std::optional<double> parameter = strategy_parameter(strategies[k]);
    std::snprintf(line, sizeof(line), "%s,%s,%.6f,%.6f,%.6f,%.6g,%d\n",
                  strategy_name(strategies[k]).c_str(),
                  parameter ? std::to_string(*parameter).c_str() : "",
                  reports[k].certificate_acceptance_rate,
                  reports[k].message_symbol_hit_rate,
                  reports[k].empirical_mutual_information_bits,
                  reports[k].miller_madow_bias_bits, reports[k].trials);
    out << line;
  }
}

}  // namespace certdel
