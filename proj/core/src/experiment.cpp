#include "gfra/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gfra/csv.hpp"
#include "gfra/version.hpp"

namespace gfra {

namespace {

constexpr long kChunkFrames = 512;
constexpr std::uint64_t kCalStream = 0xA1ull << 56;
constexpr std::uint64_t kHistStream = 0xA2ull << 56;
constexpr std::uint64_t kBlindStream = 0xB0ull << 56;
constexpr std::uint64_t kGenieStream = 0xC0ull << 56;

std::uint64_t frame_stream(std::uint64_t base, std::size_t point, long chunk) {
  return base | (static_cast<std::uint64_t>(point) << 28) |
         static_cast<std::uint64_t>(chunk);
}

struct FrameRecord {
  long frame = 0;
  int true_initial = 0;
  double z0 = 0.0;
  bool collision = false;
  double z1 = 0.0;
  int collision1 = -1;  // -1: no resolution round
  int rounds = 1;
  int scored_true = 0;
  int estimated_total = -1;
  int decoded_size = 0;
  FinalStatus status = FinalStatus::kDecoded;
  Correctness correctness = Correctness::kCorrect;
  int delivered = 0;
};

struct PointAccum {
  long correct = 0, wrong = 0, unrec = 0, unres = 0;
  long initial_active = 0, delivered = 0, lost = 0;
  std::vector<FrameRecord> records;

  void merge(const PointAccum& other) {
    correct += other.correct;
    wrong += other.wrong;
    unrec += other.unrec;
    unres += other.unres;
    initial_active += other.initial_active;
    delivered += other.delivered;
    lost += other.lost;
    records.insert(records.end(), other.records.begin(), other.records.end());
  }
};

void tally(PointAccum& acc, const ProtocolOutcome& out) {
  switch (out.correctness) {
    case Correctness::kCorrect: ++acc.correct; break;
    case Correctness::kWrongDecode: ++acc.wrong; break;
    case Correctness::kUnrecognizedCollision: ++acc.unrec; break;
    case Correctness::kUnresolvedCollision: ++acc.unres; break;
  }
  acc.initial_active += out.initial_active;
  acc.delivered += out.delivered_users;
  acc.lost += out.lost_to_thinning;
}

int pick_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs `frames` trials split into fixed-size chunks, each chunk on its own
// RNG stream, and merges chunk results in chunk order so the totals do not
// depend on the worker count.
template <typename ChunkFn>
PointAccum run_chunked(long frames, int threads, ChunkFn&& chunk_fn) {
  const long n_chunks = (frames + kChunkFrames - 1) / kChunkFrames;
  std::vector<PointAccum> per_chunk(static_cast<std::size_t>(n_chunks));
  std::atomic<long> next{0};

  auto worker = [&]() {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const long begin = c * kChunkFrames;
      const long end = std::min(frames, begin + kChunkFrames);
      per_chunk[static_cast<std::size_t>(c)] = chunk_fn(c, begin, end);
    }
  };

  const int n_threads =
      static_cast<int>(std::max<long>(1, std::min<long>(pick_threads(threads), n_chunks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  PointAccum total;
  for (const auto& acc : per_chunk) total.merge(acc);
  return total;
}

FerResult make_result(double snr_db, double pc, long frames, const PointAccum& acc,
                      double t_z, double wall) {
  FerResult r;
  r.snr_db = snr_db;
  r.pc = pc;
  r.frames = frames;
  r.correct = acc.correct;
  r.wrong_decode = acc.wrong;
  r.unrecognized_collision = acc.unrec;
  r.unresolved_collision = acc.unres;
  r.errors = acc.wrong + acc.unrec + acc.unres;
  r.fer = frames > 0 ? static_cast<double>(r.errors) / static_cast<double>(frames) : 0.0;
  const Interval ci = wilson_interval(r.errors, frames);
  r.wilson_lo = ci.lo;
  r.wilson_hi = ci.hi;
  r.initial_active = acc.initial_active;
  r.delivered_users = acc.delivered;
  r.lost_to_thinning = acc.lost;
  r.t_z = t_z;
  r.wall_seconds = wall;
  return r;
}

void write_frame_log_header(std::ostream& os) {
  os << "frame,snr_db,pc,true_initial,z0,collision,z1,collision1,rounds,scored_true,"
        "estimated_total,decoded_size,status,correctness,delivered\n";
}

void write_frame_record(std::ostream& os, double snr_db, double pc, const FrameRecord& fr) {
  os << fr.frame << "," << fmt_g17(snr_db) << "," << fmt_g17(pc) << "," << fr.true_initial
     << "," << fmt_g17(fr.z0) << "," << (fr.collision ? 1 : 0) << ",";
  if (fr.rounds > 1)
    os << fmt_g17(fr.z1) << "," << fr.collision1;
  else
    os << ",";  // no resolution round: z1 and collision1 stay empty
  os << "," << fr.rounds << "," << fr.scored_true << "," << fr.estimated_total << ","
     << fr.decoded_size << ","
     << (fr.status == FinalStatus::kDecoded ? "decoded" : "error_announced") << ","
     << to_string(fr.correctness) << "," << fr.delivered << "\n";
}

}  // namespace

const char* to_string(DecoderMode mode) {
  switch (mode) {
    case DecoderMode::kMap: return "map";
    case DecoderMode::kKnownN: return "known_n";
    case DecoderMode::kPlain: return "plain";
  }
  return "?";
}

DecoderMode decoder_mode_from_string(const std::string& s) {
  if (s == "map") return DecoderMode::kMap;
  if (s == "known_n") return DecoderMode::kKnownN;
  if (s == "plain") return DecoderMode::kPlain;
  throw std::invalid_argument("unknown decoder mode: '" + s + "'");
}

Interval wilson_interval(long errors, long frames) {
  if (frames <= 0) return {0.0, 1.0};
  constexpr double kZ = 1.959963984540054;  // 97.5th percentile of N(0,1)
  const double n = static_cast<double>(frames);
  const double phat = static_cast<double>(errors) / n;
  const double z2 = kZ * kZ;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = kZ * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  // At the boundary counts the exact interval endpoint is 0 (or 1); the
  // center/half cancellation leaves ~1e-18 residue, so pin it.
  const double lo = errors == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = errors == frames ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::uint64_t config_hash(const ExperimentConfig& cfg, bool genie) {
  std::ostringstream ss;
  ss << "m=" << cfg.m << ";n=" << cfg.n_users << ";p=" << fmt_g17(cfg.p)
     << ";ext=" << (cfg.extend_with_standard_basis ? 1 : 0) << ";snr=";
  for (double s : cfg.snr_db) ss << fmt_g17(s) << ",";
  ss << ";pc=";
  for (const auto& pc : cfg.pc) ss << (pc.adaptive ? std::string("rule") : fmt_g17(pc.value)) << ",";
  ss << ";frames=" << cfg.frames << ";seed=" << cfg.seed << ";mode=" << to_string(cfg.mode)
     << ";nmax=" << cfg.n_max << ";rounds=" << cfg.max_resolution_rounds
     << ";cal=" << cfg.calibration_samples << ";ratio=" << fmt_g17(cfg.max_ratio)
     << ";bins=" << cfg.histogram_bins << ";genie=" << (genie ? 1 : 0);

  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : ss.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void check_config(const ExperimentConfig& cfg) {
  if (cfg.frames < 1) throw std::invalid_argument("frames must be positive");
  if (cfg.snr_db.empty()) throw std::invalid_argument("need at least one SNR point");
  if (cfg.pc.empty()) throw std::invalid_argument("need at least one pc setting");
  if (cfg.n_users < 1) throw std::invalid_argument("n_users must be positive");
  for (const auto& pc : cfg.pc)
    if (!pc.adaptive && (pc.value < 0.0 || pc.value > 1.0))
      throw std::invalid_argument("fixed pc must lie in [0, 1]");
}

std::vector<Codebook> make_books(const ExperimentConfig& cfg) {
  FrameConfig fc;
  fc.frame_length = cfg.m;
  fc.extend_with_standard_basis = cfg.extend_with_standard_basis;
  const auto books = build_codebooks(fc);
  if (cfg.n_users > static_cast<int>(books.size()))
    throw std::invalid_argument("n_users exceeds the number of codebooks");
  return books;
}

}  // namespace

std::vector<FerResult> run_experiment(const ExperimentConfig& cfg,
                                      const ThresholdTable* thresholds,
                                      std::ostream* frame_log, std::ostream* progress) {
  check_config(cfg);
  const auto books = make_books(cfg);
  const int half = cfg.m / 2;
  const int n_cap = cfg.n_max < 0 ? half : cfg.n_max;
  if (n_cap > cfg.n_users) throw std::invalid_argument("n_max exceeds n_users");

  const EffectiveCodebookIndex index(books, cfg.n_users, cfg.p, n_cap);

  ProtocolConfig base;
  base.max_resolution_rounds = cfg.max_resolution_rounds;
  switch (cfg.mode) {
    case DecoderMode::kMap: base.rule = DecodeRule::kMapAllSizes; break;
    case DecoderMode::kKnownN: base.rule = DecodeRule::kEstimateCorrected; break;
    case DecoderMode::kPlain: base.rule = DecodeRule::kEstimatePlain; break;
  }

  if (frame_log) write_frame_log_header(*frame_log);

  std::vector<FerResult> results;
  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double snr_db = cfg.snr_db[si];
    const double rho = snr_db_to_linear(snr_db);

    CalibrationTable calib;
    const ThresholdEntry* preset =
        thresholds ? thresholds->find(cfg.m, cfg.n_users, cfg.p, snr_db) : nullptr;
    if (preset != nullptr) {
      calib.threshold = *preset;
      if (progress)
        *progress << "threshold for snr_db=" << snr_db << " loaded from table: t_z="
                  << calib.threshold.t_z << "\n";
    } else {
      RngStream cal_rng(cfg.seed, kCalStream | si);
      calib.threshold = calibrate_threshold(books, cfg.n_users, cfg.p, rho,
                                            cfg.calibration_samples, cfg.max_ratio, cal_rng);
      if (progress)
        *progress << "calibrated snr_db=" << snr_db << ": samples=" << cfg.calibration_samples
                  << "/branch t_z=" << calib.threshold.t_z << " miss=" << calib.threshold.miss
                  << " false_alarm=" << calib.threshold.false_alarm << "\n";
    }
    RngStream hist_rng(cfg.seed, kHistStream | si);
    calib.histograms = build_z_histograms(books, cfg.n_users, rho, cfg.calibration_samples,
                                          cfg.histogram_bins, hist_rng);

    const MapDecoder decoder(index, rho, n_cap);

    for (std::size_t pi = 0; pi < cfg.pc.size(); ++pi) {
      const PcPoint& pc = cfg.pc[pi];
      ProtocolConfig pcfg = base;
      pcfg.retransmit.adaptive = pc.adaptive;
      pcfg.retransmit.fixed = pc.value;

      const std::size_t point = si * cfg.pc.size() + pi;
      const bool trace = frame_log != nullptr;
      const auto t0 = std::chrono::steady_clock::now();

      PointAccum acc = run_chunked(cfg.frames, cfg.threads, [&](long chunk, long begin,
                                                                long end) {
        PointAccum a;
        RngStream rng(cfg.seed, frame_stream(kBlindStream, point, chunk));
        for (long f = begin; f < end; ++f) {
          const ProtocolOutcome out = run_frame(pcfg, decoder, calib, rng);
          tally(a, out);
          if (trace) {
            FrameRecord fr;
            fr.frame = f;
            fr.true_initial = out.initial_active;
            fr.z0 = out.rounds.front().z;
            fr.collision = out.rounds.front().collision_declared;
            fr.rounds = static_cast<int>(out.rounds.size());
            if (out.rounds.size() > 1) {
              fr.z1 = out.rounds.back().z;
              fr.collision1 = out.rounds.back().collision_declared ? 1 : 0;
            }
            fr.scored_true = out.scored_truth.size();
            fr.estimated_total = out.estimated_total;
            fr.decoded_size = out.status == FinalStatus::kDecoded ? out.decode.active_set.size() : -1;
            fr.status = out.status;
            fr.correctness = out.correctness;
            fr.delivered = out.delivered_users;
            a.records.push_back(fr);
          }
        }
        return a;
      });

      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double pc_value = pc.adaptive ? -1.0 : pc.value;
      results.push_back(make_result(snr_db, pc_value, cfg.frames, acc, calib.threshold.t_z, wall));

      if (trace)
        for (const auto& fr : acc.records) write_frame_record(*frame_log, snr_db, pc_value, fr);
      if (progress)
        *progress << "snr_db=" << snr_db << " pc=" << (pc.adaptive ? std::string("rule") : fmt_g17(pc.value))
                  << " fer=" << results.back().fer << " (" << wall << " s)\n";
    }
  }
  return results;
}

std::vector<FerResult> genie_baseline(const ExperimentConfig& cfg, std::ostream* progress) {
  check_config(cfg);
  const auto books = make_books(cfg);
  const int alphabet = static_cast<int>(books.front().words.size());

  const EffectiveCodebookIndex index(books, cfg.n_users, cfg.p, cfg.n_users);

  std::vector<FerResult> results;
  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double snr_db = cfg.snr_db[si];
    const double rho = snr_db_to_linear(snr_db);
    const MapDecoder decoder(index, rho, cfg.n_users);
    const auto t0 = std::chrono::steady_clock::now();

    PointAccum acc = run_chunked(cfg.frames, cfg.threads, [&](long chunk, long begin, long end) {
      PointAccum a;
      RngStream rng(cfg.seed, frame_stream(kGenieStream, si, chunk));
      for (long f = begin; f < end; ++f) {
        ActiveSet truth = draw_activity(cfg.n_users, cfg.p, rng);
        draw_messages(truth, alphabet, rng);
        const ReceivedFrame frame = synthesize_frame(books, truth, rho, rng);
        DecodeResult dec;
        switch (cfg.mode) {
          case DecoderMode::kMap:
            dec = decoder.decode_map_at_size(frame.y, truth.size());
            break;
          case DecoderMode::kKnownN:
            dec = decoder.decode_at_size(frame.y, truth.size(), ProjectionMode::kCorrected);
            break;
          case DecoderMode::kPlain:
            dec = decoder.decode_at_size(frame.y, truth.size(), ProjectionMode::kPlain);
            break;
        }
        if (dec.active_set == truth) {
          ++a.correct;
        } else {
          ++a.wrong;
        }
        a.initial_active += truth.size();
        int hits = 0;
        for (int i = 0; i < truth.size(); ++i)
          for (int j = 0; j < dec.active_set.size(); ++j)
            if (truth.users[i] == dec.active_set.users[j] &&
                truth.messages[i] == dec.active_set.messages[j])
              ++hits;
        a.delivered += hits;
      }
      return a;
    });

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(make_result(snr_db, 1.0, cfg.frames, acc,
                                  std::numeric_limits<double>::infinity(), wall));
    if (progress)
      *progress << "genie snr_db=" << snr_db << " fer=" << results.back().fer << " (" << wall
                << " s)\n";
  }
  return results;
}

namespace {

void write_meta(const ExperimentConfig& cfg, bool genie, std::ostream& os) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg, genie)));
  os << "# " << kVersionString << "\n";
  os << "# config_hash=" << hash << "\n";
  os << "# m=" << cfg.m << " n_users=" << cfg.n_users << " p=" << fmt_g17(cfg.p)
     << " frames=" << cfg.frames << " seed=" << cfg.seed << " mode=" << to_string(cfg.mode)
     << " n_max=" << cfg.n_max << " rounds=" << cfg.max_resolution_rounds
     << " calibration_samples=" << cfg.calibration_samples << " max_ratio="
     << fmt_g17(cfg.max_ratio) << " bins=" << cfg.histogram_bins
     << " ext=" << (cfg.extend_with_standard_basis ? 1 : 0) << " genie=" << (genie ? 1 : 0)
     << "\n";
  os << "# pc=-1 encodes the adaptive retransmit rule\n";
}

}  // namespace

void write_fer_csv(const std::vector<FerResult>& results, const ExperimentConfig& cfg,
                   bool genie, std::ostream& os) {
  write_meta(cfg, genie, os);
  os << "snr_db,pc,frames,errors,fer,wilson_lo,wilson_hi,correct,wrong_decode,"
        "unrecognized_collision,unresolved_collision,initial_active,delivered_users,"
        "lost_to_thinning,t_z\n";
  for (const auto& r : results) {
    os << fmt_g17(r.snr_db) << "," << fmt_g17(r.pc) << "," << r.frames << "," << r.errors << ","
       << fmt_g17(r.fer) << "," << fmt_g17(r.wilson_lo) << "," << fmt_g17(r.wilson_hi) << ","
       << r.correct << "," << r.wrong_decode << "," << r.unrecognized_collision << ","
       << r.unresolved_collision << "," << r.initial_active << "," << r.delivered_users << ","
       << r.lost_to_thinning << "," << fmt_g17(r.t_z) << "\n";
  }
}

std::vector<FerResult> parse_fer_csv(std::istream& is) {
  std::vector<FerResult> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 15) throw std::invalid_argument("result row needs 15 fields");
    FerResult r;
    r.snr_db = parse_double(f[0]);
    r.pc = parse_double(f[1]);
    r.frames = parse_long(f[2]);
    r.errors = parse_long(f[3]);
    r.fer = parse_double(f[4]);
    r.wilson_lo = parse_double(f[5]);
    r.wilson_hi = parse_double(f[6]);
    r.correct = parse_long(f[7]);
    r.wrong_decode = parse_long(f[8]);
    r.unrecognized_collision = parse_long(f[9]);
    r.unresolved_collision = parse_long(f[10]);
    r.initial_active = parse_long(f[11]);
    r.delivered_users = parse_long(f[12]);
    r.lost_to_thinning = parse_long(f[13]);
    r.t_z = parse_double(f[14]);
    out.push_back(r);
  }
  return out;
}

void emit_plot_data(const std::vector<FerResult>& results, const ExperimentConfig& cfg,
                    bool genie, const std::string& path_stem) {
  {
    std::ofstream csv(path_stem + ".csv");
    if (!csv) throw std::runtime_error("cannot open " + path_stem + ".csv");
    write_fer_csv(results, cfg, genie, csv);
  }
  std::ofstream dat(path_stem + ".dat");
  if (!dat) throw std::runtime_error("cannot open " + path_stem + ".dat");
  write_meta(cfg, genie, dat);
  dat << "# snr_db pc fer wilson_lo wilson_hi\n";

  std::vector<double> pcs;
  for (const auto& r : results)
    if (std::find(pcs.begin(), pcs.end(), r.pc) == pcs.end()) pcs.push_back(r.pc);

  bool first_block = true;
  for (double pc : pcs) {
    if (!first_block) dat << "\n";
    first_block = false;
    for (const auto& r : results) {
      if (r.pc != pc) continue;
      dat << fmt_g17(r.snr_db) << " " << fmt_g17(r.pc) << " " << fmt_g17(r.fer) << " "
          << fmt_g17(r.wilson_lo) << " " << fmt_g17(r.wilson_hi) << "\n";
    }
  }
}

}  // namespace gfra
