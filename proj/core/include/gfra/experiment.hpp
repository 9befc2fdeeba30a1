#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gfra/protocol.hpp"

namespace gfra {

// Receiver flavor for a sweep: full prior-weighted search, size estimate plus
// weighted projection, or size estimate plus raw projection.
enum class DecoderMode { kMap, kKnownN, kPlain };

const char* to_string(DecoderMode mode);
DecoderMode decoder_mode_from_string(const std::string& s);

// One retransmit-probability setting; adaptive means the estimate-driven rule.
struct PcPoint {
  bool adaptive = true;
  double value = 1.0;

  bool operator==(const PcPoint&) const = default;
};

struct ExperimentConfig {
  int m = 5;
  int n_users = 5;
  double p = 0.2;
  bool extend_with_standard_basis = false;
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30};
  std::vector<PcPoint> pc = {PcPoint{}};
  long frames = 10000;
  std::uint64_t seed = 1;
  DecoderMode mode = DecoderMode::kKnownN;
  int n_max = -1;  // hypothesis-size cap; <0 means floor(m/2)
  int max_resolution_rounds = 1;
  long calibration_samples = 20000;
  double max_ratio = 0.5;
  int histogram_bins = 200;
  int threads = 0;  // 0 picks hardware concurrency; results never depend on it
};

struct FerResult {
  double snr_db = 0.0;
  double pc = -1.0;  // -1 encodes the adaptive rule
  long frames = 0;
  long errors = 0;
  double fer = 0.0;
  double wilson_lo = 0.0, wilson_hi = 0.0;
  long correct = 0, wrong_decode = 0, unrecognized_collision = 0, unresolved_collision = 0;
  long initial_active = 0, delivered_users = 0, lost_to_thinning = 0;
  double t_z = 0.0;
  double wall_seconds = 0.0;  // console diagnostics only, never written to files
};

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// 95% Wilson score interval for errors/frames.
Interval wilson_interval(long errors, long frames);

// FNV-1a over the canonical parameter string; thread count and output paths
// do not participate.
std::uint64_t config_hash(const ExperimentConfig& cfg, bool genie);

// Full blind receiver sweep over snr_db x pc. Thresholds are taken from
// `thresholds` when a matching entry exists, otherwise calibrated on the fly
// (logged to `progress`). `frame_log`, when set, receives one CSV row per
// frame in deterministic order.
std::vector<FerResult> run_experiment(const ExperimentConfig& cfg,
                                      const ThresholdTable* thresholds = nullptr,
                                      std::ostream* frame_log = nullptr,
                                      std::ostream* progress = nullptr);

// Genie-aided baseline: the true activity count is revealed to the receiver,
// no collision detection or retransmission runs. pc is ignored (one row per
// SNR with pc recorded as 1).
std::vector<FerResult> genie_baseline(const ExperimentConfig& cfg,
                                      std::ostream* progress = nullptr);

void write_fer_csv(const std::vector<FerResult>& results, const ExperimentConfig& cfg,
                   bool genie, std::ostream& os);
std::vector<FerResult> parse_fer_csv(std::istream& is);

// Writes <path_stem>.csv (same schema as write_fer_csv) and <path_stem>.dat
// (whitespace columns, one block per pc setting, gnuplot-ready).
void emit_plot_data(const std::vector<FerResult>& results, const ExperimentConfig& cfg,
                    bool genie, const std::string& path_stem);

}  // namespace gfra
