#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "gfra/effective.hpp"
#include "gfra/gabor.hpp"

namespace gfra {

double snr_db_to_linear(double db);
double snr_linear_to_db(double rho);

// Deterministic substream: identical (seed, stream) pairs replay the identical
// draw sequence within one build of the library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::mt19937_64& engine() { return engine_; }

  // CN(0,1): real and imaginary parts each N(0, 1/2)
  std::complex<double> complex_gaussian();
  double uniform();                 // [0, 1)
  int uniform_int(int hi);          // {0, ..., hi}

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> half_normal_;
};

// Each user transmits independently with probability p; messages uniform.
ActiveSet draw_activity(int n_users, double p, RngStream& rng);
void draw_messages(ActiveSet& set, int alphabet, RngStream& rng);

// Uniform size-n user subset (messages not drawn).
ActiveSet draw_activity_of_size(int n_users, int n, RngStream& rng);

Eigen::MatrixXcd build_effective_matrix(const std::vector<Codebook>& codebooks,
                                        const ActiveSet& set);

struct ChannelDraw {
  ActiveSet active_set;
  Eigen::VectorXcd coefficients;  // per active user, CN(0,1)
  Eigen::VectorXcd noise;         // per sample, CN(0,1)
};

struct ReceivedFrame {
  Eigen::VectorXcd y;
  ChannelDraw truth;
  double rho = 1.0;
};

// y = sqrt(rho * m) * X * h + w. Draw order is fixed: coefficients first,
// then noise. zero_noise skips the noise draw entirely (test hook); fixed_h,
// when provided, is used in place of drawing coefficients.
ReceivedFrame synthesize_frame(const std::vector<Codebook>& codebooks, const ActiveSet& set,
                               double rho, RngStream& rng, bool zero_noise = false,
                               const Eigen::VectorXcd* fixed_h = nullptr);
ReceivedFrame synthesize_frame(const EffectiveCodeword& codeword, double rho, RngStream& rng,
                               bool zero_noise = false);

}  // namespace gfra
