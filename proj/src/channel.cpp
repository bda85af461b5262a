#include "certdel/channel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace certdel {

namespace {

void check_dimension_range(int d) {
  if (d < kMinDimension || d > kMaxDimension) {
    throw std::invalid_argument("channel dimension out of range");
  }
}

bool states_match(const BasisSet& a, const BasisSet& b) {
  if (a.dimension() != b.dimension()) return false;
  for (int k = 0; k < a.dimension(); ++k) {
    for (int i = 0; i < a.dimension(); ++i) {
      if (std::abs(a.state(k)[static_cast<std::size_t>(i)] -
                   b.state(k)[static_cast<std::size_t>(i)]) > 1e-9) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

ChannelModel ChannelModel::identity(int dimension) {
  check_dimension_range(dimension);
  return ChannelModel(dimension, IdentityChannel{});
}

ChannelModel ChannelModel::uniform_error(int dimension, double fidelity) {
  check_dimension_range(dimension);
  const double floor = 1.0 / dimension;
  if (!(fidelity > floor) || !(fidelity <= 1.0)) {
    throw std::invalid_argument("uniform-error fidelity must satisfy 1/d < F <= 1");
  }
  return ChannelModel(dimension, UniformErrorChannel{fidelity});
}

ChannelModel ChannelModel::rotation(ComplexMatrix unitary) {
  check_dimension_range(unitary.dimension);
  if (unitary.unitarity_deviation() > kUnitarityTol) {
    throw std::invalid_argument("rotation matrix is not unitary");
  }
  const int d = unitary.dimension;
  return ChannelModel(d, RotationChannel{std::move(unitary)});
}

ChannelModel ChannelModel::loss(int dimension, double survival) {
  check_dimension_range(dimension);
  if (!(survival >= 0.0) || !(survival <= 1.0)) {
    throw std::invalid_argument("loss survival probability must be in [0, 1]");
  }
  return ChannelModel(dimension, LossChannel{survival});
}

ChannelModel ChannelModel::intercept_resend(BasisSet basis) {
  const int d = basis.dimension();
  return ChannelModel(d, InterceptResendChannel{std::move(basis)});
}

std::string ChannelModel::kind_name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IdentityChannel>) return "identity";
        else if constexpr (std::is_same_v<T, UniformErrorChannel>) return "uniform";
        else if constexpr (std::is_same_v<T, RotationChannel>) return "rotation";
        else if constexpr (std::is_same_v<T, LossChannel>) return "loss";
        else return "intercept";
      },
      kind_);
}

TransmissionResult transmit(const QuditState& state, const ChannelModel& model,
                            Rng& rng) {
  if (state.dimension() != model.dimension()) {
    throw std::invalid_argument("transmit: dimension mismatch");
  }
  return std::visit(
      [&](const auto& k) -> TransmissionResult {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IdentityChannel>) {
          return TransmissionResult{state, false};
        } else if constexpr (std::is_same_v<T, UniformErrorChannel>) {
          const bool flag = rng.uniform() < 1.0 - k.fidelity;
          return TransmissionResult{state, flag};
        } else if constexpr (std::is_same_v<T, RotationChannel>) {
          return TransmissionResult{k.unitary.apply(state), false};
        } else if constexpr (std::is_same_v<T, LossChannel>) {
          if (rng.uniform() < k.survival) return TransmissionResult{state, false};
          return TransmissionResult{std::nullopt, false};
        } else {
          const Outcome o = measure(state, k.basis, rng);
          return TransmissionResult{k.basis.state(o.index), false};
        }
      },
      model.kind());
}

std::optional<Outcome> measure_received(const TransmissionResult& result,
                                        const BasisSet& basis, Rng& rng) {
  if (!result.delivered) return std::nullopt;
  Outcome outcome = measure(*result.delivered, basis, rng);
  if (result.forced_outcome_error) {
    // uniform over the d-1 wrong symbols
    const int d = basis.dimension();
    const int shift = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(d - 1)));
    outcome.index = (outcome.index + shift) % d;
  }
  return outcome;
}

double predicted_fidelity(const ChannelModel& model, const BasisSet& encode_basis,
                          const BasisSet& measure_basis) {
  const int d = model.dimension();
  if (encode_basis.dimension() != d || measure_basis.dimension() != d) {
    throw std::invalid_argument("predicted_fidelity: dimension mismatch");
  }
  // q[x] = Born probability of the matching outcome x given input x,
  // before any statistics-level error.
  auto born_match = [&](const ComplexMatrix* unitary) {
    double sum = 0.0;
    for (int x = 0; x < d; ++x) {
      const QuditState sent = unitary ? unitary->apply(encode_basis.state(x))
                                      : encode_basis.state(x);
      sum += std::norm(overlap(measure_basis.state(x), sent));
    }
    return sum / d;
  };
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IdentityChannel>) {
          return born_match(nullptr);
        } else if constexpr (std::is_same_v<T, LossChannel>) {
          return born_match(nullptr);  // post-selected on delivery
        } else if constexpr (std::is_same_v<T, RotationChannel>) {
          return born_match(&k.unitary);
        } else if constexpr (std::is_same_v<T, UniformErrorChannel>) {
          double sum = 0.0;
          for (int x = 0; x < d; ++x) {
            const double q =
                std::norm(overlap(measure_basis.state(x), encode_basis.state(x)));
            sum += k.fidelity * q + (1.0 - k.fidelity) * (1.0 - q) / (d - 1);
          }
          return sum / d;
        } else {
          double sum = 0.0;
          for (int x = 0; x < d; ++x) {
            for (int m = 0; m < d; ++m) {
              sum += std::norm(overlap(k.basis.state(m), encode_basis.state(x))) *
                     std::norm(overlap(measure_basis.state(x), k.basis.state(m)));
            }
          }
          return sum / d;
        }
      },
      model.kind());
}

nlohmann::json channel_to_json(const ChannelModel& model) {
  nlohmann::json params = nlohmann::json::object();
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, UniformErrorChannel>) {
          params["F"] = k.fidelity;
        } else if constexpr (std::is_same_v<T, LossChannel>) {
          params["p"] = k.survival;
        } else if constexpr (std::is_same_v<T, RotationChannel>) {
          nlohmann::json rows = nlohmann::json::array();
          for (int i = 0; i < k.unitary.dimension; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < k.unitary.dimension; ++j) {
              const Complex& c = k.unitary.at(i, j);
              row.push_back({c.real(), c.imag()});
            }
            rows.push_back(std::move(row));
          }
          params["matrix"] = std::move(rows);
        } else if constexpr (std::is_same_v<T, InterceptResendChannel>) {
          const int d = k.basis.dimension();
          if (states_match(k.basis, computational_basis(d))) {
            params["basis"] = "computational";
          } else if (states_match(k.basis, hadamard_basis(d))) {
            params["basis"] = "hadamard";
          } else {
            throw std::invalid_argument(
                "only canonical intercept bases have a JSON form");
          }
        }
      },
      model.kind());
  return nlohmann::json{{"kind", model.kind_name()}, {"params", params}};
}

namespace {

ComplexMatrix matrix_from_json(const nlohmann::json& rows, int dimension) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dimension) {
    throw std::invalid_argument("rotation matrix must have d rows");
  }
  ComplexMatrix m;
  m.dimension = dimension;
  m.elems.reserve(static_cast<std::size_t>(dimension) * dimension);
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != dimension) {
      throw std::invalid_argument("rotation matrix must have d columns per row");
    }
    for (const auto& cell : row) {
      if (!cell.is_array() || cell.size() != 2) {
        throw std::invalid_argument("matrix cells must be [re, im] pairs");
      }
      m.elems.emplace_back(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

}  // namespace

ChannelModel channel_from_json(const nlohmann::json& j, int dimension) {
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json& params = j.at("params");
  if (kind == "identity") return ChannelModel::identity(dimension);
  if (kind == "uniform") {
    return ChannelModel::uniform_error(dimension, params.at("F").get<double>());
  }
  if (kind == "loss") {
    return ChannelModel::loss(dimension, params.at("p").get<double>());
  }
  if (kind == "rotation") {
    return ChannelModel::rotation(matrix_from_json(params.at("matrix"), dimension));
  }
  if (kind == "intercept") {
    const std::string basis = params.at("basis").get<std::string>();
    if (basis == "computational") {
      return ChannelModel::intercept_resend(computational_basis(dimension));
    }
    if (basis == "hadamard") {
      return ChannelModel::intercept_resend(hadamard_basis(dimension));
    }
    throw std::invalid_argument("unknown intercept basis: " + basis);
  }
  throw std::invalid_argument("unknown channel kind: " + kind);
}

ChannelModel parse_channel_spec(const std::string& spec, int dimension) {
  if (spec == "identity") return ChannelModel::identity(dimension);
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto eq = tail.find('=');
  const std::string key = tail.substr(0, eq);
  const std::string value = eq == std::string::npos ? "" : tail.substr(eq + 1);
  if (value.empty()) {
    throw std::invalid_argument("malformed channel spec: " + spec);
  }
  if (head == "uniform" && key == "F") {
    return ChannelModel::uniform_error(dimension, std::stod(value));
  }
  if (head == "loss" && key == "p") {
    return ChannelModel::loss(dimension, std::stod(value));
  }
  if (head == "intercept" && key == "basis") {
    if (value == "computational") {
      return ChannelModel::intercept_resend(computational_basis(dimension));
    }
    if (value == "hadamard") {
      return ChannelModel::intercept_resend(hadamard_basis(dimension));
    }
    throw std::invalid_argument("unknown intercept basis: " + value);
  }
  if (head == "rotation" && key == "file") {
    std::ifstream in(value);
    if (!in) throw std::invalid_argument("cannot open rotation file: " + value);
    nlohmann::json params;
    in >> params;
    return ChannelModel::rotation(matrix_from_json(params.at("matrix"), dimension));
  }
  throw std::invalid_argument("malformed channel spec: " + spec);
}

}  // namespace certdel
