#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "certdel/channel.hpp"
#include "certdel/qudit.hpp"
#include "certdel/rng.hpp"

namespace certdel {

struct ProtocolParams {
  int dimension = 2;
  int n_rounds = 10000;
  double message_fraction = 0.5;  // fraction of rounds carrying message symbols
  double delta = 0.0;             // accepted key-error budget, in [0, 1 - 1/d)
  std::uint64_t seed = 0;

  int message_count() const;
  void validate() const;

  // Half the zero-rate QBER threshold for this dimension.
  static double default_delta(int dimension);
};

// Alice's private transcript: per-round basis choice and symbol, plus the
// message/key position split.
struct AliceRecord {
  std::vector<BasisRole> basis_choice;
  std::vector<int> symbols;
  std::vector<int> message_positions;  // sorted
  std::vector<int> key_positions;      // sorted
};

// Bob's claimed Hadamard outcomes; nullopt marks a lost round.
struct DeletionCertificate {
  std::vector<std::optional<int>> outcomes;
};

struct VerificationResult {
  bool accepted = false;
  double observed_key_error_rate = 0.0;
  int compared_rounds = 0;
};

struct SiftedMessage {
  std::vector<int> symbols;  // computational outcomes at surviving message rounds
  std::vector<int> rounds;   // originating round index per symbol
  std::optional<double> observed_message_error_rate;  // set when truth is known
};

// Places the message symbols (computational basis) at a uniformly random
// size-m subset of rounds and fills the rest with uniform key symbols
// (Hadamard basis). Returns the transcript and the emitted states in order.
std::pair<AliceRecord, std::vector<QuditState>> alice_prepare(
    const ProtocolParams& params, const std::vector<int>& message, Rng& rng);

// Honest deletion: every delivered state measured in the Hadamard basis.
DeletionCertificate bob_delete(const std::vector<QuditState>& states,
                               const ChannelModel& channel, Rng& rng);

// Compares the certificate against the key symbols at non-lost key
// positions. Throws if no rounds are comparable.
VerificationResult alice_verify(const AliceRecord& record,
                                const DeletionCertificate& certificate,
                                double delta);

// Honest read: every delivered state measured in the computational basis;
// keeps outcomes at the rounds the basis reveal marks as message rounds.
SiftedMessage bob_read(const std::vector<QuditState>& states,
                       const std::vector<BasisRole>& basis_reveal,
                       const ChannelModel& channel, Rng& rng);

// Mismatch fraction of sifted symbols against Alice's record.
double sifted_error_rate(const SiftedMessage& sifted, const AliceRecord& record);

// Toeplitz universal hash over GF(2). The matrix is defined by its
// diagonals: T[i][j] = diagonals[i - j + in_bits - 1].
struct ToeplitzHash {
  std::size_t in_bits = 0;
  std::size_t out_bits = 0;
  std::vector<std::uint8_t> diagonals;  // in_bits + out_bits - 1 bits
};

ToeplitzHash toeplitz_from_seed(std::size_t in_bits, std::size_t out_bits,
                                std::uint64_t hash_seed);
std::vector<std::uint8_t> toeplitz_apply(const ToeplitzHash& hash,
                                         const std::vector<std::uint8_t>& bits);

// Little-endian bit expansion, log2(d) bits per symbol; d must be a power
// of two.
std::vector<std::uint8_t> symbols_to_bits(const std::vector<int>& symbols, int dimension);

// symbols -> bits -> seeded Toeplitz hash -> out_bits bits.
std::vector<std::uint8_t> privacy_amplify(const std::vector<int>& symbols,
                                          int dimension, std::size_t out_bits,
                                          std::uint64_t hash_seed);

enum class BobBehavior { Delete, Read };

std::string to_string(BobBehavior behavior);

struct SessionReport {
  int dimension = 0;
  int n_rounds = 0;
  BobBehavior behavior = BobBehavior::Delete;
  double delta = 0.0;
  double message_fraction = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> qber_message;
  std::optional<double> qber_key;
  std::optional<bool> accepted;
  std::optional<double> key_rate_bits;
  int compared_rounds = 0;  // delete flow
  int sifted_count = 0;     // read flow
};

// Full transcript: prepare -> transmit -> (delete -> verify | read -> sift).
// All randomness derives from params.seed, so identical inputs give a
// bit-identical report. The basis string is only consulted by honest Bob
// after transmission (Read) or by Alice after receiving the certificate
// (Delete).
SessionReport run_session(const ProtocolParams& params, const std::vector<int>& message,
                          const ChannelModel& channel, BobBehavior behavior);

nlohmann::json session_report_to_json(const SessionReport& report);

}  // namespace certdel
