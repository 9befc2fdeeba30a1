#include "gfra/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfra {

const char* to_string(Correctness c) {
  switch (c) {
    case Correctness::kCorrect: return "correct";
    case Correctness::kWrongDecode: return "wrong_decode";
    case Correctness::kUnrecognizedCollision: return "unrecognized_collision";
    case Correctness::kUnresolvedCollision: return "unresolved_collision";
  }
  return "?";
}

double RetransmitPolicy::probability(int estimated_total, int half) const {
  if (!adaptive) return std::clamp(fixed, 0.0, 1.0);
  const int denom = std::max(estimated_total, 1);
  return std::min(1.0, static_cast<double>(half) / static_cast<double>(denom));
}

Correctness classify(FinalStatus status, const DecodeResult& decode,
                     const ActiveSet& scored_truth, int half) {
  if (status == FinalStatus::kErrorAnnounced) return Correctness::kUnresolvedCollision;
  if (decode.active_set == scored_truth) return Correctness::kCorrect;
  if (scored_truth.size() > half) return Correctness::kUnrecognizedCollision;
  return Correctness::kWrongDecode;
}

namespace {

DecodeResult decode_frame(const MapDecoder& decoder, const CalibrationTable& calib,
                          const Eigen::VectorXcd& y, double z, DecodeRule rule, int half) {
  if (rule == DecodeRule::kMapAllSizes) return decoder.decode(y);
  const auto& index = decoder.index();
  const int cap = std::min(half, decoder.max_size());
  const SizeEstimate est =
      estimate_n(z, index.frame_length(), index.num_users(), index.activation_prob(),
                 decoder.rho(), calib.histograms, 0, cap);
  return decoder.decode_at_size(
      y, est.n_hat,
      rule == DecodeRule::kEstimatePlain ? ProjectionMode::kPlain : ProjectionMode::kCorrected);
}

int count_common_pairs(const ActiveSet& a, const ActiveSet& b) {
  int hits = 0;
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      if (a.users[i] == b.users[j] && a.messages[i] == b.messages[j]) ++hits;
  return hits;
}

int count_common_users(const ActiveSet& a, const ActiveSet& b) {
  int hits = 0;
  for (int u : a.users)
    if (std::find(b.users.begin(), b.users.end(), u) != b.users.end()) ++hits;
  return hits;
}

}  // namespace

ProtocolOutcome run_frame(const ProtocolConfig& cfg, const MapDecoder& decoder,
                          const CalibrationTable& calib, RngStream& rng,
                          const EnergyProbe& probe) {
  const auto& index = decoder.index();
  const auto& books = index.codebooks();
  const int m = index.frame_length();
  const int half = m / 2;
  const int n_users = index.num_users();
  const double p = index.activation_prob();
  const double rho = decoder.rho();
  const int alphabet = static_cast<int>(books.front().words.size());

  if (calib.threshold.m != m || calib.threshold.n_users != n_users)
    throw std::invalid_argument("calibration table does not match the codebook index");
  if (cfg.max_resolution_rounds < 0)
    throw std::invalid_argument("max_resolution_rounds must be >= 0");

  ProtocolOutcome out;

  ActiveSet truth = draw_activity(n_users, p, rng);
  draw_messages(truth, alphabet, rng);
  out.initial_active = truth.size();
  const ActiveSet initial = truth;

  ReceivedFrame frame = synthesize_frame(books, truth, rho, rng);
  const double t_z = calib.threshold.t_z;

  for (int round = 0;; ++round) {
    const double z = probe ? probe(frame.y, round) : energy_statistic(frame.y);
    const bool collision = z > t_z;
    out.rounds.push_back({z, collision, truth.size()});

    if (!collision) {
      out.status = FinalStatus::kDecoded;
      out.scored_truth = truth;
      out.decode = decode_frame(decoder, calib, frame.y, z, cfg.rule, half);
      break;
    }
    if (round >= cfg.max_resolution_rounds) {
      out.status = FinalStatus::kErrorAnnounced;
      out.scored_truth = truth;
      break;
    }

    const SizeEstimate est = estimate_n(z, m, n_users, p, rho, calib.histograms,
                                        std::min(half + 1, n_users), n_users);
    out.estimated_total = est.n_hat;
    const double pc = cfg.retransmit.probability(est.n_hat, half);
    out.retransmit_prob = pc;

    ActiveSet next;
    Eigen::VectorXcd next_h;
    if (cfg.resolution_draw == ResolutionDraw::kGatedSurvivors) {
      std::vector<Eigen::Index> kept;
      for (int i = 0; i < truth.size(); ++i) {
        if (rng.uniform() < pc) {
          next.users.push_back(truth.users[i]);
          next.messages.push_back(truth.messages[i]);
          kept.push_back(i);
        }
      }
      if (!cfg.redraw_channel) {
        next_h.resize(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i)
          next_h(static_cast<Eigen::Index>(i)) = frame.truth.coefficients(kept[i]);
      }
      if (cfg.fresh_messages) draw_messages(next, alphabet, rng);
    } else {
      next = draw_activity(n_users, p * pc, rng);
      draw_messages(next, alphabet, rng);
    }

    truth = next;
    frame = synthesize_frame(books, truth, rho, rng, false,
                             cfg.redraw_channel ? nullptr : &next_h);
  }

  out.correctness = classify(out.status, out.decode, out.scored_truth, half);
  out.lost_to_thinning = out.initial_active - count_common_users(initial, out.scored_truth);
  if (out.status == FinalStatus::kDecoded)
    out.delivered_users = count_common_pairs(out.decode.active_set, out.scored_truth);
  return out;
}

}  // namespace gfra
