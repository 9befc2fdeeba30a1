#pragma once

#include <functional>
#include <vector>

#include "gfra/decoder.hpp"

namespace gfra {

enum class Correctness { kCorrect, kWrongDecode, kUnrecognizedCollision, kUnresolvedCollision };
enum class FinalStatus { kDecoded, kErrorAnnounced };

const char* to_string(Correctness c);

// How the receiver picks a hypothesis once no collision is flagged.
// kMapAllSizes searches every size up to the decoder cap with priors;
// the estimate rules first pick a size from the energy statistic, then score
// within that size (weighted or raw projection).
enum class DecodeRule { kMapAllSizes, kEstimateCorrected, kEstimatePlain };

// kGatedSurvivors: colliding users independently retransmit with probability
// p_c and nobody else joins. kFreshDraw: the retry round redraws activity from
// scratch with per-user probability p * p_c (diagnostic mode; with p_c = 1 it
// reproduces the initial round's statistics).
enum class ResolutionDraw { kGatedSurvivors, kFreshDraw };

struct RetransmitPolicy {
  bool adaptive = true;  // p_c = min(1, floor(m/2) / max(estimated_total, 1))
  double fixed = 1.0;

  double probability(int estimated_total, int half) const;
};

struct ProtocolConfig {
  DecodeRule rule = DecodeRule::kEstimateCorrected;
  int max_resolution_rounds = 1;
  RetransmitPolicy retransmit;
  bool redraw_channel = true;   // fresh fading for the retry; false reuses survivor gains
  bool fresh_messages = false;  // survivors re-pick their words on retry
  ResolutionDraw resolution_draw = ResolutionDraw::kGatedSurvivors;
};

struct RoundRecord {
  double z = 0.0;
  bool collision_declared = false;
  int true_active = 0;
};

struct ProtocolOutcome {
  FinalStatus status = FinalStatus::kDecoded;
  Correctness correctness = Correctness::kCorrect;
  std::vector<RoundRecord> rounds;
  DecodeResult decode;     // valid when status == kDecoded
  ActiveSet scored_truth;  // truth of the frame the receiver finally acted on
  int initial_active = 0;
  int estimated_total = -1;       // collision-branch size estimate; -1 when no retry ran
  double retransmit_prob = -1.0;  // p_c used; -1 when no retry ran
  int delivered_users = 0;        // scored (user, word) pairs decoded exactly
  int lost_to_thinning = 0;       // initially active users missing from the scored frame
};

// Test hook replacing the energy measurement (round is 0 for the first
// transmission).
using EnergyProbe = std::function<double(const Eigen::VectorXcd& y, int round)>;

// One random-access frame end to end: draw activity, detect collision by
// thresholding the received energy, run up to max_resolution_rounds retries
// with thinning, then decode and classify. Operating-point parameters
// (n_users, p, rho) come from the decoder's index and calibration table,
// which must agree with each other.
ProtocolOutcome run_frame(const ProtocolConfig& cfg, const MapDecoder& decoder,
                          const CalibrationTable& calib, RngStream& rng,
                          const EnergyProbe& probe = {});

// kUnresolvedCollision when the receiver announced an error; otherwise
// kCorrect on an exact active-set match, kUnrecognizedCollision when the
// scored frame was an undetected collision, kWrongDecode otherwise.
Correctness classify(FinalStatus status, const DecodeResult& decode,
                     const ActiveSet& scored_truth, int half);

}  // namespace gfra
