#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include <json.hpp>

#include "certdel/channel.hpp"
#include "certdel/protocol.hpp"
#include "certdel/rng.hpp"

namespace certdel {

// Malicious-receiver strategies. A strategy fixes how each in-flight round
// is measured; the certificate and the message guess are then forged from
// whatever the measurements yielded.
struct HonestDeleteStrategy {};
struct ReadAllComputationalStrategy {};
struct SplitSubsetStrategy {
  double read_fraction;  // per-round probability of a computational read
};
struct RotatedBasisStrategy {
  // d = 2 only. angle 0 is the computational basis, pi/4 the Hadamard;
  // pi/8 is the intermediate (Breidbart-style) compromise.
  double angle;
};
struct FixedBasisStrategy {
  BasisSet basis;
};

using AttackStrategy = std::variant<HonestDeleteStrategy, ReadAllComputationalStrategy,
                                    SplitSubsetStrategy, RotatedBasisStrategy,
                                    FixedBasisStrategy>;

std::string strategy_name(const AttackStrategy& strategy);

// Grid parameter of a strategy when it has one (split fraction, angle).
std::optional<double> strategy_parameter(const AttackStrategy& strategy);

struct AttackReport {
  double certificate_acceptance_rate = 0.0;
  double message_symbol_hit_rate = 0.0;
  double empirical_mutual_information_bits = 0.0;
  // First-order (Miller-Madow) bias of the plug-in MI estimate.
  double miller_madow_bias_bits = 0.0;
  int trials = 0;
  long long message_samples = 0;
};

// Simulates `trials` full sessions with a fresh uniform message each time.
// Forging rule: the certificate entry is Bob's measured outcome whenever his
// basis carries key information (anything but a computational read, where a
// uniform guess is provably as good); the message guess is his outcome
// whenever the basis carries message information (anything but a Hadamard
// read). Per-trial substreams derive from (rng seed, trial index).
AttackReport run_attack(const AttackStrategy& strategy, const ProtocolParams& params,
                        const ChannelModel& channel, int trials, Rng& rng,
                        int jobs = 1);

// One report per strategy, point k using substream rng.fork(k).
std::vector<AttackReport> tradeoff_sweep(const std::vector<AttackStrategy>& strategies,
                                         const ProtocolParams& params,
                                         const ChannelModel& channel, int trials,
                                         Rng& rng, int jobs = 1);

nlohmann::json attack_report_to_json(const AttackStrategy& strategy,
                                     const AttackReport& report);

// CSV: strategy,parameter,acceptance_rate,hit_rate,mi_bits,mi_bias_bits,trials
void write_sweep_csv(const std::vector<AttackStrategy>& strategies,
                     const std::vector<AttackReport>& reports, std::ostream& out);

}  // namespace certdel
