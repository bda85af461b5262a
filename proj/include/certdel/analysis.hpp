#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "certdel/channel.hpp"
#include "certdel/qudit.hpp"
#include "certdel/rng.hpp"

namespace certdel {

// d x d probability table P(x, y), row = Alice's symbol, column = Bob's.
struct JointDistribution {
  int dimension = 0;
  std::vector<double> p;  // row-major

  double at(int x, int y) const {
    return p[static_cast<std::size_t>(x) * dimension + y];
  }
};

// The joint distribution of a uniform-error channel at fidelity F with
// uniformly distributed input symbols.
JointDistribution uniform_error_joint(int dimension, double fidelity);

// Plug-in joint distribution from a d x d count histogram.
JointDistribution joint_from_counts(int dimension, const std::vector<long long>& counts);

// I(X;Y) = sum P(x,y) log2[P(x,y) / (P(x)P(y))], 0 log 0 = 0. Requires
// non-negative entries summing to 1 within 1e-9.
double mutual_information(const JointDistribution& joint);

// Closed form for the uniform-error channel:
// log2(d) + F log2 F + (1-F) log2((1-F)/(d-1)), for 1/d <= F <= 1.
// Endpoints are returned analytically (0 at F = 1/d, log2 d at F = 1).
double mutual_information_uniform(int dimension, double fidelity);

// 2 log2(d max_{i,j} |<b_i|e_j>|). Equals log2 d for a conjugate MUB pair.
double uncertainty_bound(const BasisSet& basis_b, const BasisSet& basis_e);

// h_d(x) = -x log2(x/(d-1)) - (1-x) log2(1-x), for 0 <= x <= (d-1)/d.
double shannon_entropy_d(int dimension, double x);

// K_d(Q) = log2(d) - 2 h_d(Q), bits per sifted photon. May be negative;
// callers gate on positivity.
double key_rate(int dimension, double qber);

struct FidelityThreshold {
  double fidelity;  // F*, the smallest fidelity with a positive rate
  double qber;      // Q* = 1 - F*
};

// Root of h_d(1-F) = log2(d)/2 on (1/d, 1), found by bisection to 1e-10.
// Q < Q* is the positive-rate region; Q = Q* gives rate zero.
FidelityThreshold fidelity_threshold(int dimension);

// True iff the closed-form mutual information exceeds log2(d)/2.
bool positive_rate_condition(int dimension, double fidelity);

// 2d x 2d probability-of-detection table. Rows are Bob's measurement
// settings, columns Alice's prepared states, each split into a
// computational block (indices 0..d-1) and a Hadamard block (d..2d-1).
struct DetectionMatrix {
  int dimension = 0;
  int trials_per_cell = 0;
  std::vector<double> p;  // row-major, (2d)^2 entries

  double at(int row, int col) const {
    return p[static_cast<std::size_t>(row) * 2 * dimension + col];
  }
  // "C0".."C(d-1)", "H0".."H(d-1)"
  std::string label(int i) const;
};

// Monte Carlo estimate: for each prepared state and each measurement basis,
// tallies trials_per_cell outcome draws. Lost rounds are post-selected away;
// the denominator counts delivered trials.
DetectionMatrix estimate_detection_matrix(int dimension, const ChannelModel& channel,
                                          int trials_per_cell, Rng& rng,
                                          int jobs = 1);

// 1 - mean diagonal of the requested same-basis block.
double qber_from_matrix(const DetectionMatrix& matrix, BasisRole role);

// Labeled CSV, probabilities to 6 decimal places.
void write_detection_matrix_csv(const DetectionMatrix& matrix, std::ostream& out);

struct RateReport {
  int dimension = 0;
  double qber = 0.0;
  double fidelity = 0.0;
  double entropy_bits = 0.0;
  double key_rate_bits = 0.0;
  double threshold_qber = 0.0;
  bool positive = false;
};

RateReport rate_report(int dimension, double qber);
nlohmann::json rate_report_to_json(const RateReport& report);

}  // namespace certdel
