#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "certdel/rng.hpp"

namespace certdel {

using Complex = std::complex<double>;

inline constexpr int kMinDimension = 2;
inline constexpr int kMaxDimension = 64;
// Construction is held to 1e-12; measurement input tolerates accumulated
// float drift up to 1e-9.
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kMeasurementNormTol = 1e-9;

enum class BasisRole { Computational, Hadamard };

std::string to_string(BasisRole role);

// Normalized d-dimensional complex amplitude vector, d in [2, 64].
class QuditState {
 public:
  explicit QuditState(std::vector<Complex> amplitudes,
                      double norm_tolerance = kConstructionTol);

  int dimension() const { return static_cast<int>(amplitudes_.size()); }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  // |sum_j |a_j|^2 - 1|
  double norm_deviation() const;

  // The j-th standard unit vector in dimension d.
  static QuditState basis_vector(int dimension, int index);

 private:
  std::vector<Complex> amplitudes_;
};

// <a|b>, conjugate-linear in the first argument.
Complex overlap(const QuditState& a, const QuditState& b);

struct Outcome {
  int index = 0;
  BasisRole basis_role = BasisRole::Computational;
};

// OAM topological charges attached to computational indices. Even d skips
// l = 0 (charges -d/2..-1, +1..+d/2); odd d runs -(d-1)/2..(d-1)/2.
class OamLabelMap {
 public:
  explicit OamLabelMap(int dimension);

  int dimension() const { return static_cast<int>(labels_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  int label_for(int index) const;
  int index_for(int label) const;

 private:
  std::vector<int> labels_;
};

// d orthonormal states with a role tag; satisfies the POVM completeness
// condition sum_x |s_x><s_x| = 1 (both checked to 1e-12 at construction).
class BasisSet {
 public:
  BasisSet(std::vector<QuditState> states, BasisRole role, OamLabelMap labels);

  int dimension() const { return static_cast<int>(states_.size()); }
  BasisRole role() const { return role_; }
  const std::vector<QuditState>& states() const { return states_; }
  const QuditState& state(int k) const { return states_[static_cast<std::size_t>(k)]; }
  const OamLabelMap& labels() const { return labels_; }

 private:
  std::vector<QuditState> states_;
  BasisRole role_;
  OamLabelMap labels_;
};

// Standard unit vectors |psi_0..d-1>, role Computational.
BasisSet computational_basis(int dimension);

// Fourier-type conjugate basis |phi_k> = (1/sqrt d) sum_j w^(jk) e^(i pi j/d) |psi_j>
// with w = e^(2 pi i/d). Mutually unbiased with the computational basis for
// every d: |<phi_k|psi_j>|^2 = 1/d. For d=2 this is {(|psi_0>+i|psi_1>)/sqrt2,
// (|psi_0>-i|psi_1>)/sqrt2}.
BasisSet hadamard_basis(int dimension);

// c = max_{x,y} |<a_x|b_y>|^2. Equals 1/d for a conjugate MUB pair, 1 for a
// basis against itself.
double mub_overlap_constant(const BasisSet& a, const BasisSet& b);

// Born-rule projective measurement: outcome k with probability |<b_k|state>|^2.
// Consumes exactly one uniform draw from rng.
Outcome measure(const QuditState& state, const BasisSet& basis, Rng& rng);

// Square-grid sample of a transverse mode field. Row-major, y varies slowest.
struct ModeField {
  int resolution = 0;
  double extent = 0.0;
  std::vector<Complex> values;

  const Complex& at(int iy, int ix) const {
    return values[static_cast<std::size_t>(iy) * resolution + ix];
  }
  double coordinate(int i) const {
    return -extent + 2.0 * extent * i / (resolution - 1);
  }
};

// Samples sum_j a_j R(r,|l_j|) e^(i l_j phi) on a (resolution x resolution)
// grid over [-extent, extent]^2, where R is the lowest-order ring envelope
// (r sqrt2)^|l| e^(-r^2) normalized to peak 1. Visualization only.
ModeField sample_mode_field(const QuditState& superposition,
                            const OamLabelMap& labels, int resolution,
                            double extent);

// CSV with header x,y,re,im,intensity,phase; phase in radians [0, 2pi).
void write_mode_field_csv(const ModeField& field, std::ostream& out);

// Dense d x d complex matrix, row-major. Used for rotation channels.
struct ComplexMatrix {
  int dimension = 0;
  std::vector<Complex> elems;

  const Complex& at(int row, int col) const {
    return elems[static_cast<std::size_t>(row) * dimension + col];
  }
  Complex& at(int row, int col) {
    return elems[static_cast<std::size_t>(row) * dimension + col];
  }

  static ComplexMatrix identity(int dimension);

  QuditState apply(const QuditState& state) const;

  // max |(U U^dagger - 1)_{ij}|
  double unitarity_deviation() const;
};

}  // namespace certdel
