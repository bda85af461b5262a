#include "certdel/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "certdel/parallel.hpp"

namespace certdel {

namespace {

void check_dimension_range(int d) {
  if (d < kMinDimension || d > kMaxDimension) {
    throw std::invalid_argument("dimension out of range");
  }
}

}  // namespace

JointDistribution uniform_error_joint(int dimension, double fidelity) {
  check_dimension_range(dimension);
  if (!(fidelity >= 1.0 / dimension) || !(fidelity <= 1.0)) {
    throw std::invalid_argument("fidelity must be in [1/d, 1]");
  }
  JointDistribution joint;
  joint.dimension = dimension;
  joint.p.resize(static_cast<std::size_t>(dimension) * dimension);
  const double diag = fidelity / dimension;
  const double off = (1.0 - fidelity) / (dimension * (dimension - 1.0));
  for (int x = 0; x < dimension; ++x) {
    for (int y = 0; y < dimension; ++y) {
      joint.p[static_cast<std::size_t>(x) * dimension + y] = (x == y) ? diag : off;
    }
  }
  return joint;
}

JointDistribution joint_from_counts(int dimension, const std::vector<long long>& counts) {
  check_dimension_range(dimension);
  if (counts.size() != static_cast<std::size_t>(dimension) * dimension) {
    throw std::invalid_argument("count table must have d*d entries");
  }
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw std::invalid_argument("negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("empty count table");
  JointDistribution joint;
  joint.dimension = dimension;
  joint.p.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    joint.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return joint;
}

double mutual_information(const JointDistribution& joint) {
  const int d = joint.dimension;
  check_dimension_range(d);
  double total = 0.0;
  for (double v : joint.p) {
    if (v < 0.0) throw std::invalid_argument("joint distribution has negative entries");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("joint distribution does not sum to 1");
  }
  std::vector<double> px(static_cast<std::size_t>(d), 0.0);
  std::vector<double> py(static_cast<std::size_t>(d), 0.0);
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      px[static_cast<std::size_t>(x)] += joint.at(x, y);
      py[static_cast<std::size_t>(y)] += joint.at(x, y);
    }
  }
  double info = 0.0;
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      const double pxy = joint.at(x, y);
      if (pxy > 0.0) {
        info += pxy * std::log2(pxy / (px[static_cast<std::size_t>(x)] *
                                       py[static_cast<std::size_t>(y)]));
      }
    }
  }
  return info;
}

double mutual_information_uniform(int dimension, double fidelity) {
  check_dimension_range(dimension);
  const double floor = 1.0 / dimension;
  if (!(fidelity >= floor) || !(fidelity <= 1.0)) {
    throw std::invalid_argument("fidelity must be in [1/d, 1]");
  }
  if (fidelity == floor) return 0.0;
  if (fidelity == 1.0) return std::log2(static_cast<double>(dimension));
  return std::log2(static_cast<double>(dimension)) + fidelity * std::log2(fidelity) +
         (1.0 - fidelity) * std::log2((1.0 - fidelity) / (dimension - 1.0));
}

double uncertainty_bound(const BasisSet& basis_b, const BasisSet& basis_e) {
  if (basis_b.dimension() != basis_e.dimension()) {
    throw std::invalid_argument("uncertainty_bound: dimension mismatch");
  }
  const double max_amp = std::sqrt(mub_overlap_constant(basis_b, basis_e));
  return 2.0 * std::log2(basis_b.dimension() * max_amp);
}

double shannon_entropy_d(int dimension, double x) {
  check_dimension_range(dimension);
  const double ceiling = (dimension - 1.0) / dimension;
  if (!(x >= 0.0) || !(x <= ceiling)) {
    throw std::invalid_argument("entropy argument must be in [0, (d-1)/d]");
  }
  if (x == 0.0) return 0.0;
  double h = -x * std::log2(x / (dimension - 1.0));
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

double key_rate(int dimension, double qber) {
  return std::log2(static_cast<double>(dimension)) -
         2.0 * shannon_entropy_d(dimension, qber);
}

FidelityThreshold fidelity_threshold(int dimension) {
  check_dimension_range(dimension);
  const double target = std::log2(static_cast<double>(dimension)) / 2.0;
  // h_d(1-F) is strictly decreasing in F on (1/d, 1), from log2 d down to 0.
  double lo = 1.0 / dimension + 1e-9;
  double hi = 1.0 - 1e-9;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (shannon_entropy_d(dimension, 1.0 - mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double fstar = 0.5 * (lo + hi);
  return FidelityThreshold{fstar, 1.0 - fstar};
}

bool positive_rate_condition(int dimension, double fidelity) {
  return mutual_information_uniform(dimension, fidelity) >
         std::log2(static_cast<double>(dimension)) / 2.0;
}

std::string DetectionMatrix::label(int i) const {
  if (i < dimension) return "C" + std::to_string(i);
  return "H" + std::to_string(i - dimension);
}

DetectionMatrix estimate_detection_matrix(int dimension, const ChannelModel& channel,
                                          int trials_per_cell, Rng& rng, int jobs) {
  check_dimension_range(dimension);
  if (channel.dimension() != dimension) {
    throw std::invalid_argument("channel dimension mismatch");
  }
  if (trials_per_cell < 1) {
    throw std::invalid_argument("trials_per_cell must be >= 1");
  }
  const BasisSet comp = computational_basis(dimension);
  const BasisSet had = hadamard_basis(dimension);
  const int side = 2 * dimension;

  DetectionMatrix matrix;
  matrix.dimension = dimension;
  matrix.trials_per_cell = trials_per_cell;
  matrix.p.assign(static_cast<std::size_t>(side) * side, 0.0);

  // One task per (prepared state, measurement block); each owns a column
  // block and its own rng stream, so the estimate is schedule-independent.
  parallel_for(2 * side, jobs, [&](int task) {
    const int col = task % side;
    const int block = task / side;  // 0 = computational settings, 1 = Hadamard
    const BasisSet& prep_basis = (col < dimension) ? comp : had;
    const QuditState& prepared = prep_basis.state(col % dimension);
    const BasisSet& setting = (block == 0) ? comp : had;
    Rng task_rng = rng.fork(static_cast<std::uint64_t>(task));

    std::vector<long long> tally(static_cast<std::size_t>(dimension), 0);
    long long delivered = 0;
    for (int t = 0; t < trials_per_cell; ++t) {
      Rng trial_rng = task_rng.fork(static_cast<std::uint64_t>(t));
      const TransmissionResult sent = transmit(prepared, channel, trial_rng);
      const std::optional<Outcome> o = measure_received(sent, setting, trial_rng);
      if (!o) continue;  // lost rounds post-selected away
      ++tally[static_cast<std::size_t>(o->index)];
      ++delivered;
    }
    for (int r = 0; r < dimension; ++r) {
      const int row = block * dimension + r;
      matrix.p[static_cast<std::size_t>(row) * side + col] =
          delivered == 0 ? 0.0
                         : static_cast<double>(tally[static_cast<std::size_t>(r)]) /
                               static_cast<double>(delivered);
    }
  });
  return matrix;
}

double qber_from_matrix(const DetectionMatrix& matrix, BasisRole role) {
  const int d = matrix.dimension;
  check_dimension_range(d);
  const int offset = (role == BasisRole::Computational) ? 0 : d;
  double diag_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    diag_sum += matrix.at(offset + i, offset + i);
  }
  return 1.0 - diag_sum / d;
}

void write_detection_matrix_csv(const DetectionMatrix& matrix, std::ostream& out) {
  const int side = 2 * matrix.dimension;
  for (int col = 0; col < side; ++col) {
    out << ',' << matrix.label(col);
  }
  out << '\n';
  char cell[32];
  for (int row = 0; row < side; ++row) {
    out << matrix.label(row);
    for (int col = 0; col < side; ++col) {
      std::snprintf(cell, sizeof(cell), ",%.6f", matrix.at(row, col));
      out << cell;
    }
    out << '\n';
  }
}

RateReport rate_report(int dimension, double qber) {
  RateReport report;
  report.dimension = dimension;
  report.qber = qber;
  report.fidelity = 1.0 - qber;
  report.entropy_bits = shannon_entropy_d(dimension, qber);
  report.key_rate_bits = key_rate(dimension, qber);
  report.threshold_qber = fidelity_threshold(dimension).qber;
  report.positive = qber < report.threshold_qber;
  return report;
}

nlohmann::json rate_report_to_json(const RateReport& report) {
  return nlohmann::json{
      {"d", report.dimension},
      {"qber", report.qber},
      {"fidelity", report.fidelity},
      {"entropy_bits", report.entropy_bits},
      {"key_rate_bits", report.key_rate_bits},
      {"threshold_qber", report.threshold_qber},
      {"positive", report.positive},
  };
}

}  // namespace certdel
