#pragma once

#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "certdel/qudit.hpp"
#include "certdel/rng.hpp"

namespace certdel {

struct IdentityChannel {};

// Statistics-level model: the state passes untouched, but with probability
// 1-F the receiver's outcome is replaced by a uniformly random one of the
// other d-1 symbols. In the matched basis this yields detection fidelity
// exactly F; in the conjugate basis it leaves the uniform 1/d unchanged.
struct UniformErrorChannel {
  double fidelity;
};

struct RotationChannel {
  ComplexMatrix unitary;
};

struct LossChannel {
  double survival;
};

// Measures in flight in the given basis and forwards the measured eigenstate.
struct InterceptResendChannel {
  BasisSet basis;
};

class ChannelModel {
 public:
  using Kind = std::variant<IdentityChannel, UniformErrorChannel, RotationChannel,
                            LossChannel, InterceptResendChannel>;

  static ChannelModel identity(int dimension);
  static ChannelModel uniform_error(int dimension, double fidelity);  // 1/d < F <= 1
  static ChannelModel rotation(ComplexMatrix unitary);                // unitary to 1e-10
  static ChannelModel loss(int dimension, double survival);           // 0 <= p <= 1
  static ChannelModel intercept_resend(BasisSet basis);

  int dimension() const { return dimension_; }
  const Kind& kind() const { return kind_; }
  std::string kind_name() const;

 private:
  ChannelModel(int dimension, Kind kind) : dimension_(dimension), kind_(std::move(kind)) {}

  int dimension_;
  Kind kind_;
};

inline constexpr double kUnitarityTol = 1e-10;

struct TransmissionResult {
  std::optional<QuditState> delivered;  // absent = photon lost
  bool forced_outcome_error = false;    // set only by UniformError
};

// One channel use. Rng draws per kind: Identity/Rotation none, Loss one,
// UniformError one, InterceptResend one (the in-flight measurement).
TransmissionResult transmit(const QuditState& state, const ChannelModel& model,
                            Rng& rng);

// Bob's side of a round: Born measurement of the delivered state plus the
// forced-error replacement when flagged. Returns nullopt for lost rounds.
std::optional<Outcome> measure_received(const TransmissionResult& result,
                                        const BasisSet& basis, Rng& rng);

// Analytic probability that a measurement in measure_basis reproduces the
// symbol encoded in encode_basis, averaged uniformly over symbols. Lost
// rounds are post-selected away, so Loss behaves like Identity here.
double predicted_fidelity(const ChannelModel& model, const BasisSet& encode_basis,
                          const BasisSet& measure_basis);

// JSON form {"kind": ..., "params": {...}}; kinds identity, uniform, loss,
// rotation, intercept. Rotation embeds the matrix as d rows of [re, im]
// pairs; intercept names one of the two canonical bases.
nlohmann::json channel_to_json(const ChannelModel& model);
ChannelModel channel_from_json(const nlohmann::json& j, int dimension);

// Command-line mini-grammar:
//   identity | uniform:F=<float> | loss:p=<float> | rotation:file=<path>
//   | intercept:basis=<computational|hadamard>
// rotation files hold the channel_to_json "params" object for kind rotation.
ChannelModel parse_channel_spec(const std::string& spec, int dimension);

}  // namespace certdel
