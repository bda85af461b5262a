#include "certdel/qudit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace certdel {

namespace {

void check_dimension(int d) {
  if (d < kMinDimension || d > kMaxDimension) {
    throw std::invalid_argument("dimension must be in [" +
                                std::to_string(kMinDimension) + ", " +
                                std::to_string(kMaxDimension) + "], got " +
                                std::to_string(d));
  }
}

}  // namespace

std::string to_string(BasisRole role) {
  return role == BasisRole::Computational ? "computational" : "hadamard";
}

QuditState::QuditState(std::vector<Complex> amplitudes, double norm_tolerance)
    : amplitudes_(std::move(amplitudes)) {
  check_dimension(static_cast<int>(amplitudes_.size()));
  if (norm_deviation() > norm_tolerance) {
    throw std::invalid_argument("state is not normalized (|1 - norm^2| = " +
                                std::to_string(norm_deviation()) + ")");
  }
}

double QuditState::norm_deviation() const {
  double sum = 0.0;
  for (const Complex& a : amplitudes_) sum += std::norm(a);
  return std::abs(sum - 1.0);
}

QuditState QuditState::basis_vector(int dimension, int index) {
  check_dimension(dimension);
  if (index < 0 || index >= dimension) {
    throw std::invalid_argument("basis index out of range");
  }
  std::vector<Complex> amps(static_cast<std::size_t>(dimension), Complex{0.0, 0.0});
  amps[static_cast<std::size_t>(index)] = Complex{1.0, 0.0};
  return QuditState(std::move(amps));
}

Complex overlap(const QuditState& a, const QuditState& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("overlap: dimension mismatch");
  }
  Complex sum{0.0, 0.0};
  for (int i = 0; i < a.dimension(); ++i) {
    sum += std::conj(a[static_cast<std::size_t>(i)]) * b[static_cast<std::size_t>(i)];
  }
  return sum;
}

OamLabelMap::OamLabelMap(int dimension) {
  check_dimension(dimension);
  labels_.reserve(static_cast<std::size_t>(dimension));
  if (dimension % 2 == 0) {
    for (int l = -dimension / 2; l <= dimension / 2; ++l) {
      if (l != 0) labels_.push_back(l);
    }
  } else {
    for (int l = -(dimension - 1) / 2; l <= (dimension - 1) / 2; ++l) {
      labels_.push_back(l);
    }
  }
}

int OamLabelMap::label_for(int index) const {
  if (index < 0 || index >= dimension()) {
    throw std::invalid_argument("OAM index out of range");
  }
  return labels_[static_cast<std::size_t>(index)];
}

int OamLabelMap::index_for(int label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw std::invalid_argument("no OAM index carries charge " + std::to_string(label));
  }
  return static_cast<int>(it - labels_.begin());
}

BasisSet::BasisSet(std::vector<QuditState> states, BasisRole role, OamLabelMap labels)
    : states_(std::move(states)), role_(role), labels_(std::move(labels)) {
  const int d = static_cast<int>(states_.size());
  check_dimension(d);
  if (labels_.dimension() != d) {
    throw std::invalid_argument("label map dimension mismatch");
  }
  for (const QuditState& s : states_) {
    if (s.dimension() != d) {
      throw std::invalid_argument("basis state dimension mismatch");
    }
  }
  // pairwise orthonormality
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(std::abs(overlap(states_[static_cast<std::size_t>(i)],
                                    states_[static_cast<std::size_t>(j)])) -
                   target) > kConstructionTol) {
        throw std::invalid_argument("basis states are not orthonormal");
      }
    }
  }
  // POVM completeness: sum_x |s_x><s_x| = 1
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Complex sum{0.0, 0.0};
      for (const QuditState& s : states_) {
        sum += s[static_cast<std::size_t>(i)] * std::conj(s[static_cast<std::size_t>(j)]);
      }
      const Complex target = (i == j) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      if (std::abs(sum - target) > kConstructionTol) {
        throw std::invalid_argument("basis projectors do not resolve the identity");
      }
    }
  }
}

BasisSet computational_basis(int dimension) {
  check_dimension(dimension);
  std::vector<QuditState> states;
  states.reserve(static_cast<std::size_t>(dimension));
  for (int k = 0; k < dimension; ++k) {
    states.push_back(QuditState::basis_vector(dimension, k));
  }
  return BasisSet(std::move(states), BasisRole::Computational, OamLabelMap(dimension));
}

BasisSet hadamard_basis(int dimension) {
  check_dimension(dimension);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dimension));
  std::vector<QuditState> states;
  states.reserve(static_cast<std::size_t>(dimension));
  for (int k = 0; k < dimension; ++k) {
    std::vector<Complex> amps(static_cast<std::size_t>(dimension));
    for (int j = 0; j < dimension; ++j) {
      // phase pi*j*(2k+1)/d = 2*pi*j*k/d + pi*j/d
      const double phase =
          std::numbers::pi * j * (2.0 * k + 1.0) / static_cast<double>(dimension);
      amps[static_cast<std::size_t>(j)] = std::polar(inv_sqrt_d, phase);
    }
    states.emplace_back(std::move(amps));
  }
  return BasisSet(std::move(states), BasisRole::Hadamard, OamLabelMap(dimension));
}

double mub_overlap_constant(const BasisSet& a, const BasisSet& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("mub_overlap_constant: dimension mismatch");
  }
  double max_sq = 0.0;
  for (const QuditState& sa : a.states()) {
    for (const QuditState& sb : b.states()) {
      max_sq = std::max(max_sq, std::norm(overlap(sa, sb)));
    }
  }
  return max_sq;
}

Outcome measure(const QuditState& state, const BasisSet& basis, Rng& rng) {
  if (state.dimension() != basis.dimension()) {
    throw std::invalid_argument("measure: dimension mismatch");
  }
  if (state.norm_deviation() > kMeasurementNormTol) {
    throw std::invalid_argument("measure: state not normalized");
  }
  const int d = basis.dimension();
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (int k = 0; k < d; ++k) {
    cumulative += std::norm(overlap(basis.state(k), state));
    if (u < cumulative) return Outcome{k, basis.role()};
  }
  return Outcome{d - 1, basis.role()};  // u landed in rounding slack
}

namespace {

// (r sqrt2)^m e^(-r^2) scaled so the ring peak is 1.
double ring_envelope(double r, int m) {
  const double raw = std::pow(r * std::numbers::sqrt2, m) * std::exp(-r * r);
  if (m == 0) return raw;
  const double peak = std::pow(static_cast<double>(m), m / 2.0) * std::exp(-m / 2.0);
  return raw / peak;
}

}  // namespace

ModeField sample_mode_field(const QuditState& superposition,
                            const OamLabelMap& labels, int resolution,
                            double extent) {
  if (resolution < 16) {
    throw std::invalid_argument("mode field resolution must be >= 16");
  }
  if (superposition.dimension() != labels.dimension()) {
    throw std::invalid_argument("sample_mode_field: dimension mismatch");
  }
  if (!(extent > 0.0)) {
    throw std::invalid_argument("mode field extent must be positive");
  }
  ModeField field;
  field.resolution = resolution;
  field.extent = extent;
  field.values.resize(static_cast<std::size_t>(resolution) * resolution);
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = field.coordinate(iy);
    for (int ix = 0; ix < resolution; ++ix) {
      const double x = field.coordinate(ix);
      const double r = std::hypot(x, y);
      const double phi = std::atan2(y, x);
      Complex value{0.0, 0.0};
      for (int j = 0; j < superposition.dimension(); ++j) {
        const int charge = labels.label_for(j);
        value += superposition[static_cast<std::size_t>(j)] *
                 ring_envelope(r, std::abs(charge)) *
                 std::polar(1.0, charge * phi);
      }
      field.values[static_cast<std::size_t>(iy) * resolution + ix] = value;
    }
  }
  return field;
}

void write_mode_field_csv(const ModeField& field, std::ostream& out) {
  out << "x,y,re,im,intensity,phase\n";
  char line[160];
  for (int iy = 0; iy < field.resolution; ++iy) {
    for (int ix = 0; ix < field.resolution; ++ix) {
      const Complex v = field.at(iy, ix);
      double phase = std::arg(v);
      if (phase < 0.0) phase += 2.0 * std::numbers::pi;
      std::snprintf(line, sizeof(line), "%.6f,%.6f,%.10g,%.10g,%.10g,%.10g\n",
                    field.coordinate(ix), field.coordinate(iy), v.real(),
                    v.imag(), std::norm(v), phase);
      out << line;
    }
  }
}

ComplexMatrix ComplexMatrix::identity(int dimension) {
  check_dimension(dimension);
  ComplexMatrix m;
  m.dimension = dimension;
  m.elems.assign(static_cast<std::size_t>(dimension) * dimension, Complex{0.0, 0.0});
  for (int i = 0; i < dimension; ++i) m.at(i, i) = Complex{1.0, 0.0};
  return m;
}

QuditState ComplexMatrix::apply(const QuditState& state) const {
  if (state.dimension() != dimension) {
    throw std::invalid_argument("matrix-state dimension mismatch");
  }
  std::vector<Complex> out(static_cast<std::size_t>(dimension), Complex{0.0, 0.0});
  for (int i = 0; i < dimension; ++i) {
    Complex sum{0.0, 0.0};
    for (int j = 0; j < dimension; ++j) {
      sum += at(i, j) * state[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = sum;
  }
  // unitary action preserves norm up to the matrix's own deviation
  return QuditState(std::move(out), kMeasurementNormTol);
}

double ComplexMatrix::unitarity_deviation() const {
  double max_dev = 0.0;
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) {
      Complex sum{0.0, 0.0};
      for (int k = 0; k < dimension; ++k) {
        sum += at(i, k) * std::conj(at(j, k));
      }
      const Complex target = (i == j) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      max_dev = std::max(max_dev, std::abs(sum - target));
    }
  }
  return max_dev;
}

}  // namespace certdel
