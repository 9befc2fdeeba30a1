#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gfra/gabor.hpp"

namespace gfra {

struct SubspaceBasis {
  Eigen::MatrixXcd columns;  // orthonormal, ambient x dimension

  int ambient() const { return static_cast<int>(columns.rows()); }
  int dimension() const { return static_cast<int>(columns.cols()); }
};

// Thin SVD of a frame matrix, written as basis * diag(sqrt(eigenvalues)) * right.
// eigenvalues are those of the Gram matrix (squared singular values), descending.
// Phases are pinned so the factorization is unique: the first entry of each
// basis column with magnitude above 1e-12 is made real positive and the
// compensating phase is pushed into the matching row of `right`.
struct SvdTriple {
  SubspaceBasis basis;         // ambient x n
  Eigen::VectorXd eigenvalues;  // n, descending, >= 0
  Eigen::MatrixXcd right;       // n x n unitary

  Eigen::MatrixXcd reconstruct() const;
};

SvdTriple svd_decompose(const Eigen::MatrixXcd& x);

// Angles between equal-dimensional subspaces, ascending, each in [0, pi/2].
Eigen::VectorXd principal_angles(const SubspaceBasis& a, const SubspaceBasis& b);

// sqrt(sum of squared principal-angle sines); evaluated through the Frobenius
// norm of the basis cross-product, which avoids forming the angles.
double chordal_distance(const SubspaceBasis& a, const SubspaceBasis& b);

enum class PairScan { kExhaustive, kSampled };

struct DistanceScanEntry {
  int n_active = 0;
  PairScan mode = PairScan::kExhaustive;
  std::uint64_t pairs_checked = 0;
  double min_distance = 0.0;
  std::uint64_t violations = 0;  // pairs at or below min_gap
};

struct DistanceScanReport {
  int frame_length = 0;
  double min_gap = 0.0;
  std::vector<DistanceScanEntry> per_size;

  double min_distance() const;
  std::uint64_t total_violations() const;
  bool ok() const { return total_violations() == 0; }
};

// Scans pairwise chordal distances between the column spans of all effective
// matrices with n_active in 1..n_max, where n_max may not exceed
// floor(frame_length/2). Exhaustive mode checks every unordered pair;
// sampled mode draws sample_pairs random distinct pairs per size.
DistanceScanReport verify_min_distance(const FrameConfig& cfg, int n_max, PairScan mode,
                                       double min_gap = 1e-6,
                                       std::uint64_t sample_pairs = 1000000,
                                       std::uint64_t seed = 1);

// Columns: n_active, mode, pairs_checked, min_distance, violations.
void write_distance_scan_csv(const DistanceScanReport& report, std::ostream& os);

}  // namespace gfra
