#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace gfra {

// Codebook family parameters. frame_length must be a prime >= 5 so that the
// cubic-phase seed sequence yields the flat cross-correlation profile.
struct FrameConfig {
  int frame_length = 5;
  bool normalize = true;                  // scale every word to unit norm
  bool extend_with_standard_basis = false;  // append the identity basis as one more codebook
};

bool is_prime(int m);
void validate(const FrameConfig& cfg);  // throws std::invalid_argument

struct Codeword {
  int user = 0;     // cyclic-shift index k
  int message = 0;  // modulation index l
  Eigen::VectorXcd entries;
};

struct Codebook {
  int user = 0;
  std::vector<Codeword> words;

  // Columns are the codewords in message order.
  Eigen::MatrixXcd matrix() const;
};

// Cubic-phase unit-modulus seed sequence of length m.
Eigen::VectorXcd alltop_sequence(int m);

// Word (k, l): cyclic shift of the seed by k, modulated by the l-th harmonic.
Codeword gabor_codeword(const FrameConfig& cfg, int user, int message);

// One codebook per cyclic shift (frame_length of them), plus the standard
// basis as a final extra codebook when the extension flag is set.
std::vector<Codebook> build_codebooks(const FrameConfig& cfg);

struct CoherencePair {
  int user_a = 0, msg_a = 0;
  int user_b = 0, msg_b = 0;
  double magnitude = 0.0;
};

struct CoherenceReport {
  double max_cross = 0.0;               // largest cross-codebook |<a,b>|
  std::vector<double> observed;         // distinct inner-product magnitudes, ascending
  std::vector<CoherencePair> violations;  // pairs outside {0, 1/sqrt(m)} (tolerance tol)
  bool ok() const { return violations.empty(); }
};

// Checks every distinct pair of words: same-codebook pairs must be orthogonal,
// cross-codebook magnitudes must equal 1/sqrt(m) or 0 within tol.
CoherenceReport verify_coherence(const std::vector<Codebook>& codebooks, double tol = 1e-10);

// One row per word: user, message, then interleaved real/imag entries at
// 17 significant digits.
void write_codebook_csv(const std::vector<Codebook>& codebooks, std::ostream& os);

}  // namespace gfra
