#include "certdel/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "certdel/analysis.hpp"

namespace certdel {

namespace {

// Session-level stream ids; round streams hang off kBobStream.
constexpr std::uint64_t kPrepareStream = 0;
constexpr std::uint64_t kBobStream = 1;

}  // namespace

int ProtocolParams::message_count() const {
  return static_cast<int>(std::lround(message_fraction * n_rounds));
}

void ProtocolParams::validate() const {
  if (dimension < kMinDimension || dimension > kMaxDimension) {
    throw std::invalid_argument("protocol dimension out of range");
  }
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
  if (!(message_fraction > 0.0) || !(message_fraction < 1.0)) {
    throw std::invalid_argument("message_fraction must be in (0, 1)");
  }
  if (!(delta >= 0.0) || !(delta < 1.0 - 1.0 / dimension)) {
    throw std::invalid_argument("delta must be in [0, 1 - 1/d)");
  }
  const int m = message_count();
  if (m < 1 || m >= n_rounds) {
    throw std::invalid_argument("message_fraction leaves no message or key rounds");
  }
}

double ProtocolParams::default_delta(int dimension) {
  return fidelity_threshold(dimension).qber / 2.0;
}

std::pair<AliceRecord, std::vector<QuditState>> alice_prepare(
    const ProtocolParams& params, const std::vector<int>& message, Rng& rng) {
  params.validate();
  const int d = params.dimension;
  const int n = params.n_rounds;
  const int m = params.message_count();
  if (static_cast<int>(message.size()) != m) {
    throw std::invalid_argument("message length must be round(message_fraction * n_rounds)");
  }
  for (int s : message) {
    if (s < 0 || s >= d) throw std::invalid_argument("message symbol out of range");
  }

  // Uniform size-m position subset via partial Fisher-Yates.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < m; ++i) {
    const std::size_t j = i + rng.uniform_index(static_cast<std::size_t>(n - i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }
  AliceRecord record;
  record.message_positions.assign(order.begin(), order.begin() + m);
  std::sort(record.message_positions.begin(), record.message_positions.end());
  record.key_positions.assign(order.begin() + m, order.end());
  std::sort(record.key_positions.begin(), record.key_positions.end());

  record.basis_choice.assign(static_cast<std::size_t>(n), BasisRole::Hadamard);
  record.symbols.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < m; ++i) {
    const std::size_t pos = static_cast<std::size_t>(record.message_positions[i]);
    record.basis_choice[pos] = BasisRole::Computational;
    record.symbols[pos] = message[static_cast<std::size_t>(i)];
  }
  for (int pos : record.key_positions) {
    record.symbols[static_cast<std::size_t>(pos)] =
        static_cast<int>(rng.uniform_index(static_cast<std::size_t>(d)));
  }

  const BasisSet comp = computational_basis(d);
  const BasisSet had = hadamard_basis(d);
  std::vector<QuditState> states;
  states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const BasisSet& basis =
        record.basis_choice[static_cast<std::size_t>(i)] == BasisRole::Computational
            ? comp
            : had;
    states.push_back(basis.state(record.symbols[static_cast<std::size_t>(i)]));
  }
  return {std::move(record), std::move(states)};
}

namespace {

// Per-round substreams keep outcomes independent of iteration order and let
// callers couple runs against the same channel noise.
std::vector<std::optional<Outcome>> measure_all(const std::vector<QuditState>& states,
                                                const BasisSet& basis,
                                                const ChannelModel& channel,
                                                Rng& rng) {
  std::vector<std::optional<Outcome>> outcomes;
  outcomes.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Rng round_rng = rng.fork(static_cast<std::uint64_t>(i));
    const TransmissionResult sent = transmit(states[i], channel, round_rng);
    outcomes.push_back(measure_received(sent, basis, round_rng));
  }
  return outcomes;
}

}  // namespace

DeletionCertificate bob_delete(const std::vector<QuditState>& states,
                               const ChannelModel& channel, Rng& rng) {
  if (states.empty()) throw std::invalid_argument("no states to delete");
  const BasisSet had = hadamard_basis(states.front().dimension());
  DeletionCertificate cert;
  for (std::optional<Outcome>& o : measure_all(states, had, channel, rng)) {
    cert.outcomes.push_back(o ? std::optional<int>(o->index) : std::nullopt);
  }
  return cert;
}

VerificationResult alice_verify(const AliceRecord& record,
                                const DeletionCertificate& certificate,
                                double delta) {
  if (certificate.outcomes.size() != record.basis_choice.size()) {
    throw std::invalid_argument("certificate length does not match the transcript");
  }
  int compared = 0;
  int mismatches = 0;
  for (int pos : record.key_positions) {
    const std::optional<int>& claimed = certificate.outcomes[static_cast<std::size_t>(pos)];
    if (!claimed) continue;
    ++compared;
    if (*claimed != record.symbols[static_cast<std::size_t>(pos)]) ++mismatches;
  }
  if (compared == 0) {
    throw std::runtime_error("verification indeterminate: no comparable key rounds");
  }
  VerificationResult result;
  result.compared_rounds = compared;
  result.observed_key_error_rate = static_cast<double>(mismatches) / compared;
  result.accepted = result.observed_key_error_rate <= delta;
  return result;
}

SiftedMessage bob_read(const std::vector<QuditState>& states,
                       const std::vector<BasisRole>& basis_reveal,
                       const ChannelModel& channel, Rng& rng) {
  if (basis_reveal.size() != states.size()) {
    throw std::invalid_argument("basis reveal length does not match");
  }
  if (states.empty()) throw std::invalid_argument("no states to read");
  const BasisSet comp = computational_basis(states.front().dimension());
  SiftedMessage sifted;
  const std::vector<std::optional<Outcome>> outcomes =
      measure_all(states, comp, channel, rng);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (basis_reveal[i] != BasisRole::Computational) continue;
    if (!outcomes[i]) continue;  // lost rounds sifted out
    sifted.symbols.push_back(outcomes[i]->index);
    sifted.rounds.push_back(static_cast<int>(i));
  }
  return sifted;
}

double sifted_error_rate(const SiftedMessage& sifted, const AliceRecord& record) {
  if (sifted.symbols.empty()) {
    throw std::invalid_argument("no sifted symbols to compare");
  }
  int mismatches = 0;
  for (std::size_t i = 0; i < sifted.symbols.size(); ++i) {
    const std::size_t round = static_cast<std::size_t>(sifted.rounds[i]);
    if (sifted.symbols[i] != record.symbols[round]) ++mismatches;
  }
  return static_cast<double>(mismatches) / static_cast<double>(sifted.symbols.size());
}

ToeplitzHash toeplitz_from_seed(std::size_t in_bits, std::size_t out_bits,
                                std::uint64_t hash_seed) {
  ToeplitzHash hash;
  hash.in_bits = in_bits;
  hash.out_bits = out_bits;
  hash.diagonals.resize(in_bits + out_bits - 1);
  Rng rng(hash_seed);
  for (std::uint8_t& bit : hash.diagonals) {
    bit = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  }
  return hash;
}

std::vector<std::uint8_t> toeplitz_apply(const ToeplitzHash& hash,
                                         const std::vector<std::uint8_t>& bits) {
  if (bits.size() != hash.in_bits) {
    throw std::invalid_argument("input length does not match the hash");
  }
  if (hash.diagonals.size() != hash.in_bits + hash.out_bits - 1) {
    throw std::invalid_argument("malformed Toeplitz diagonals");
  }
  std::vector<std::uint8_t> out(hash.out_bits, 0);
  for (std::size_t i = 0; i < hash.out_bits; ++i) {
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < hash.in_bits; ++j) {
      acc ^= static_cast<std::uint8_t>(hash.diagonals[i + hash.in_bits - 1 - j] & bits[j]);
    }
    out[i] = acc;
  }
  return out;
}

std::vector<std::uint8_t> symbols_to_bits(const std::vector<int>& symbols, int dimension) {
  if (dimension < kMinDimension || (dimension & (dimension - 1)) != 0) {
    throw std::invalid_argument("symbol packing requires a power-of-two dimension");
  }
  int bits_per_symbol = 0;
  while ((1 << bits_per_symbol) < dimension) ++bits_per_symbol;
  std::vector<std::uint8_t> bits;
  bits.reserve(symbols.size() * static_cast<std::size_t>(bits_per_symbol));
  for (int s : symbols) {
    if (s < 0 || s >= dimension) throw std::invalid_argument("symbol out of range");
    for (int b = 0; b < bits_per_symbol; ++b) {
      bits.push_back(static_cast<std::uint8_t>((s >> b) & 1));
    }
  }
  return bits;
}

std::vector<std::uint8_t> privacy_amplify(const std::vector<int>& symbols,
                                          int dimension, std::size_t out_bits,
                                          std::uint64_t hash_seed) {
  const std::vector<std::uint8_t> bits = symbols_to_bits(symbols, dimension);
  if (out_bits > bits.size()) {
    throw std::invalid_argument("out_bits exceeds the input bit count");
  }
  if (out_bits == 0) return {};
  return toeplitz_apply(toeplitz_from_seed(bits.size(), out_bits, hash_seed), bits);
}

std::string to_string(BobBehavior behavior) {
  return behavior == BobBehavior::Delete ? "delete" : "read";
}

SessionReport run_session(const ProtocolParams& params, const std::vector<int>& message,
                          const ChannelModel& channel, BobBehavior behavior) {
  params.validate();
  if (channel.dimension() != params.dimension) {
    throw std::invalid_argument("channel dimension does not match the session");
  }
  Rng root(params.seed);
  Rng prep_rng = root.fork(kPrepareStream);
  Rng bob_rng = root.fork(kBobStream);
  auto [record, states] = alice_prepare(params, message, prep_rng);

  SessionReport report;
  report.dimension = params.dimension;
  report.n_rounds = params.n_rounds;
  report.behavior = behavior;
  report.delta = params.delta;
  report.message_fraction = params.message_fraction;
  report.seed = params.seed;

  if (behavior == BobBehavior::Delete) {
    const DeletionCertificate cert = bob_delete(states, channel, bob_rng);
    const VerificationResult vr = alice_verify(record, cert, params.delta);
    report.qber_key = vr.observed_key_error_rate;
    report.accepted = vr.accepted;
    report.compared_rounds = vr.compared_rounds;
  } else {
    const SiftedMessage sifted = bob_read(states, record.basis_choice, channel, bob_rng);
    report.sifted_count = static_cast<int>(sifted.symbols.size());
    if (!sifted.symbols.empty()) {
      const double qber = sifted_error_rate(sifted, record);
      report.qber_message = qber;
      if (qber <= (params.dimension - 1.0) / params.dimension) {
        report.key_rate_bits = key_rate(params.dimension, qber);
      }
    }
  }
  return report;
}

nlohmann::json session_report_to_json(const SessionReport& report) {
  nlohmann::json j{
      {"d", report.dimension},
      {"n_rounds", report.n_rounds},
      {"behavior", to_string(report.behavior)},
      {"delta", report.delta},
      {"message_fraction", report.message_fraction},
      {"seed", std::to_string(report.seed)},
      {"compared_rounds", report.compared_rounds},
      {"sifted_count", report.sifted_count},
  };
  j["qber_message"] = report.qber_message ? nlohmann::json(*report.qber_message)
                                          : nlohmann::json(nullptr);
  j["qber_key"] =
      report.qber_key ? nlohmann::json(*report.qber_key) : nlohmann::json(nullptr);
  j["accepted"] =
      report.accepted ? nlohmann::json(*report.accepted) : nlohmann::json(nullptr);
  j["key_rate_bits"] = report.key_rate_bits ? nlohmann::json(*report.key_rate_bits)
                                            : nlohmann::json(nullptr);
  return j;
}

}  // namespace certdel
