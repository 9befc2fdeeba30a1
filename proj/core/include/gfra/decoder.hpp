#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gfra/channel.hpp"
#include "gfra/effective.hpp"

namespace gfra {

// Gaussian log-likelihood of y under one hypothesis, with y-only and constant
// terms dropped: sum_i w_i |v_i^H y|^2 - sum_i log(1 + rho*m*lambda_i), where
// w_i = 1 / (1 + 1/(rho*m*lambda_i)) and zero eigenvalues contribute nothing.
// The silent hypothesis scores exactly 0.
double log_likelihood(const Eigen::VectorXcd& y, const EffectiveCodeword& cw, double rho);

struct DecodeResult {
  enum class Kind { kSilent, kCodeword };
  Kind kind = Kind::kSilent;
  std::int64_t index = 0;  // global index of the winner
  ActiveSet active_set;
  double metric = 0.0;
  std::vector<double> metrics;  // per-candidate scores, only when requested
};

// Prior-weighted search over all hypotheses with size <= n_max (n_max < 0
// scans the whole index). Ties keep the earlier enumeration index.
DecodeResult map_decode(const Eigen::VectorXcd& y, const EffectiveCodebookIndex& index,
                        double rho, int n_max = -1, bool keep_metrics = false);

// Projection rule used when the number of active users is treated as known.
// kCorrected applies the per-direction SNR weights w_i; kPlain scores raw
// projection energy onto the hypothesis subspace.
enum class ProjectionMode { kCorrected, kPlain };

DecodeResult decode_at_size(const Eigen::VectorXcd& y, const EffectiveCodebookIndex& index,
                            int n, double rho, ProjectionMode mode, bool keep_metrics = false);

double energy_statistic(const Eigen::VectorXcd& y);

// Precomputed per-hypothesis weights/penalties for one (index, rho) pair.
class MapDecoder {
 public:
  MapDecoder(const EffectiveCodebookIndex& index, double rho, int n_max = -1);

  const EffectiveCodebookIndex& index() const { return *index_; }
  double rho() const { return rho_; }
  int max_size() const { return n_max_; }

  DecodeResult decode(const Eigen::VectorXcd& y) const;
  DecodeResult decode_at_size(const Eigen::VectorXcd& y, int n, ProjectionMode mode) const;
  // Likelihood-only search within one size (uniform prior inside the group).
  DecodeResult decode_map_at_size(const Eigen::VectorXcd& y, int n) const;

 private:
  struct Cand {
    const EffectiveCodeword* cw;
    Eigen::VectorXd weights;  // w_i, zero where lambda_i == 0
    double logdet;
    double logprior;  // -inf for zero prior
  };

  double score(const Cand& c, const Eigen::VectorXcd& y, ProjectionMode mode,
               bool with_penalty) const;

  const EffectiveCodebookIndex* index_;
  double rho_;
  int n_max_;
  std::vector<std::vector<Cand>> by_size_;
};

// Calibrated energy threshold for one operating point. t_z = +inf encodes
// "collision unreachable" (n_users <= floor(m/2)): the detector never fires.
struct ThresholdEntry {
  int m = 0;
  int n_users = 0;
  double p = 0.0;
  double rho_db = 0.0;
  double t_z = 0.0;
  double miss = 0.0;         // estimated P(z <= t_z | collision)
  double false_alarm = 0.0;  // estimated P(z > t_z | no collision)
  long samples = 0;          // per conditional branch
  bool collision_reachable = false;
};

class ThresholdTable {
 public:
  void add(const ThresholdEntry& entry);
  const ThresholdEntry* find(int m, int n_users, double p, double rho_db) const;
  const std::vector<ThresholdEntry>& entries() const { return entries_; }

  void save(std::ostream& os) const;
  static ThresholdTable load(std::istream& is);

 private:
  std::vector<ThresholdEntry> entries_;
};

// Monte Carlo calibration: draws `samples` frames from each conditional branch
// (collision = more than floor(m/2) users active, given activity probability
// p) and returns the largest threshold whose estimated miss/false-alarm ratio
// stays at or below max_ratio. Requires max_ratio in (0, 1].
ThresholdEntry calibrate_threshold(const std::vector<Codebook>& codebooks, int n_users, double p,
                                   double rho, long samples, double max_ratio, RngStream& rng);

// Smoothed per-size densities of the energy statistic, shared support.
struct ZHistograms {
  int m = 0;
  int n_users = 0;
  double rho = 0.0;
  double lo = 0.0, hi = 0.0;
  int bins = 0;
  long samples_per_size = 0;
  std::vector<std::vector<double>> log_density;  // [size][bin]
};

ZHistograms build_z_histograms(const std::vector<Codebook>& codebooks, int n_users, double rho,
                               long samples_per_size, int bins, RngStream& rng);

struct SizeEstimate {
  int n_hat = 0;
  bool used_fallback = false;  // z left the calibrated support (or zero posterior mass)
  int n_lo = 0, n_hi = 0;
  std::vector<double> log_posterior;  // per candidate size in [n_lo, n_hi], -inf allowed
};

// Histogram-MAP size estimate with a binomial(n_users, p) prior, restricted to
// sizes in [n_lo, n_hi] (n_hi < 0 means n_users). Falls back to the
// nearest-mean rule when z lies outside the calibrated support.
SizeEstimate estimate_n(double z, int m, int n_users, double p, double rho,
                        const ZHistograms& hists, int n_lo = 0, int n_hi = -1);

// argmin over sizes with prior mass of |z - (m + rho*m*n)|; ties take the
// smaller size. Ignores the prior filter when it would empty the range.
int nearest_mean_size(double z, int m, double rho, const std::vector<double>& size_pmf,
                      int n_lo, int n_hi);

struct CalibrationTable {
  ThresholdEntry threshold;
  ZHistograms histograms;
};

CalibrationTable calibrate(const std::vector<Codebook>& codebooks, int n_users, double p,
                           double rho, long samples, double max_ratio, int bins,
                           RngStream& rng);

}  // namespace gfra
