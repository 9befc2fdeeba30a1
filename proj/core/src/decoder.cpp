#include "gfra/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gfra/csv.hpp"

namespace gfra {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double quad_form(const Eigen::VectorXcd& y, const SubspaceBasis& basis,
                 const Eigen::VectorXd* weights) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < basis.columns.cols(); ++i) {
    const double e = std::norm(basis.columns.col(i).dot(y));
    q += weights != nullptr ? (*weights)(i)*e : e;
  }
  return q;
}

}  // namespace

double log_likelihood(const Eigen::VectorXcd& y, const EffectiveCodeword& cw, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  const int n = cw.active_set.size();
  if (n == 0) return 0.0;
  const double g = rho * static_cast<double>(y.size());
  double quad = 0.0, logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lam = cw.svd.eigenvalues(i);
    if (lam <= 0.0) continue;
    const double w = 1.0 / (1.0 + 1.0 / (g * lam));
    quad += w * std::norm(cw.svd.basis.columns.col(i).dot(y));
    logdet += std::log1p(g * lam);
  }
  return quad - logdet;
}

DecodeResult map_decode(const Eigen::VectorXcd& y, const EffectiveCodebookIndex& index,
                        double rho, int n_max, bool keep_metrics) {
  MapDecoder dec(index, rho, n_max);
  DecodeResult r = dec.decode(y);
  if (keep_metrics) {
    const int cap = dec.max_size();
    r.metrics.clear();
    for (int n = 0; n <= cap; ++n)
      for (const auto& cw : index.of_size(n))
        r.metrics.push_back(log_likelihood(y, cw, rho) +
                            (cw.prior > 0.0 ? std::log(cw.prior) : kNegInf));
  }
  return r;
}

DecodeResult decode_at_size(const Eigen::VectorXcd& y, const EffectiveCodebookIndex& index,
                            int n, double rho, ProjectionMode mode, bool keep_metrics) {
  MapDecoder dec(index, rho, n);
  DecodeResult r = dec.decode_at_size(y, n, mode);
  if (keep_metrics) {
    r.metrics.clear();
    for (const auto& cw : index.of_size(n)) {
      double q = 0.0;
      const double g = rho * static_cast<double>(y.size());
      for (int i = 0; i < n; ++i) {
        const double lam = cw.svd.eigenvalues(i);
        if (lam <= 0.0) continue;
        const double w = mode == ProjectionMode::kCorrected ? 1.0 / (1.0 + 1.0 / (g * lam)) : 1.0;
        q += w * std::norm(cw.svd.basis.columns.col(i).dot(y));
      }
      r.metrics.push_back(q);
    }
  }
  return r;
}

double energy_statistic(const Eigen::VectorXcd& y) { return y.squaredNorm(); }

MapDecoder::MapDecoder(const EffectiveCodebookIndex& index, double rho, int n_max)
    : index_(&index), rho_(rho) {
  if (rho_ <= 0.0) throw std::invalid_argument("rho must be positive");
  n_max_ = n_max < 0 ? index.max_active() : n_max;
  if (n_max_ > index.max_active())
    throw std::invalid_argument("n_max exceeds the enumerated hypothesis sizes");
  const double g = rho_ * static_cast<double>(index.frame_length());

  by_size_.resize(static_cast<std::size_t>(n_max_) + 1);
  for (int n = 0; n <= n_max_; ++n) {
    const auto& group = index.of_size(n);
    auto& cands = by_size_[n];
    cands.reserve(group.size());
    for (const auto& cw : group) {
      Cand c;
      c.cw = &cw;
      c.weights.resize(n);
      c.logdet = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lam = cw.svd.eigenvalues(i);
        if (lam > 0.0) {
          c.weights(i) = 1.0 / (1.0 + 1.0 / (g * lam));
          c.logdet += std::log1p(g * lam);
        } else {
          c.weights(i) = 0.0;
        }
      }
      c.logprior = cw.prior > 0.0 ? std::log(cw.prior) : kNegInf;
      cands.push_back(std::move(c));
    }
  }
}

double MapDecoder::score(const Cand& c, const Eigen::VectorXcd& y, ProjectionMode mode,
                         bool with_penalty) const {
  const double quad = quad_form(y, c.cw->svd.basis,
                                mode == ProjectionMode::kCorrected ? &c.weights : nullptr);
  return with_penalty ? quad - c.logdet : quad;
}

DecodeResult MapDecoder::decode(const Eigen::VectorXcd& y) const {
  DecodeResult best;
  best.index = 0;
  best.metric = kNegInf;
  bool first = true;
  for (int n = 0; n <= n_max_; ++n) {
    for (const auto& c : by_size_[n]) {
      const double s = c.logprior == kNegInf
                           ? kNegInf
                           : score(c, y, ProjectionMode::kCorrected, true) + c.logprior;
      if (first || s > best.metric) {
        first = false;
        best.metric = s;
        best.index = c.cw->index;
        best.active_set = c.cw->active_set;
      }
    }
  }
  best.kind = best.active_set.size() == 0 ? DecodeResult::Kind::kSilent
                                          : DecodeResult::Kind::kCodeword;
  return best;
}

DecodeResult MapDecoder::decode_at_size(const Eigen::VectorXcd& y, int n,
                                        ProjectionMode mode) const {
  if (n < 0 || n > n_max_) throw std::invalid_argument("size outside the decoder's range");
  DecodeResult best;
  best.metric = kNegInf;
  bool first = true;
  for (const auto& c : by_size_[n]) {
    const double s = score(c, y, mode, false);
    if (first || s > best.metric) {
      first = false;
      best.metric = s;
      best.index = c.cw->index;
      best.active_set = c.cw->active_set;
    }
  }
  best.kind = n == 0 ? DecodeResult::Kind::kSilent : DecodeResult::Kind::kCodeword;
  return best;
}

DecodeResult MapDecoder::decode_map_at_size(const Eigen::VectorXcd& y, int n) const {
  if (n < 0 || n > n_max_) throw std::invalid_argument("size outside the decoder's range");
  DecodeResult best;
  best.metric = kNegInf;
  bool first = true;
  for (const auto& c : by_size_[n]) {
    const double s = score(c, y, ProjectionMode::kCorrected, true);
    if (first || s > best.metric) {
      first = false;
      best.metric = s;
      best.index = c.cw->index;
      best.active_set = c.cw->active_set;
    }
  }
  best.kind = n == 0 ? DecodeResult::Kind::kSilent : DecodeResult::Kind::kCodeword;
  return best;
}

void ThresholdTable::add(const ThresholdEntry& entry) {
  for (auto& e : entries_) {
    if (e.m == entry.m && e.n_users == entry.n_users && e.p == entry.p &&
        e.rho_db == entry.rho_db) {
      e = entry;
      return;
    }
  }
  entries_.push_back(entry);
}

const ThresholdEntry* ThresholdTable::find(int m, int n_users, double p, double rho_db) const {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (const auto& e : entries_) {
    if (e.m == m && e.n_users == n_users && close(e.p, p) && close(e.rho_db, rho_db)) return &e;
  }
  return nullptr;
}

void ThresholdTable::save(std::ostream& os) const {
  os << "m,n_users,p,rho_db,t_z,miss,false_alarm,samples,collision_reachable\n";
  for (const auto& e : entries_) {
    os << e.m << "," << e.n_users << "," << fmt_g17(e.p) << "," << fmt_g17(e.rho_db) << ","
       << fmt_g17(e.t_z) << "," << fmt_g17(e.miss) << "," << fmt_g17(e.false_alarm) << ","
       << e.samples << "," << (e.collision_reachable ? 1 : 0) << "\n";
  }
}

ThresholdTable ThresholdTable::load(std::istream& is) {
  ThresholdTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::invalid_argument("threshold table row needs 9 fields");
    ThresholdEntry e;
    e.m = static_cast<int>(parse_long(f[0]));
    e.n_users = static_cast<int>(parse_long(f[1]));
    e.p = parse_double(f[2]);
    e.rho_db = parse_double(f[3]);
    e.t_z = parse_double(f[4]);
    e.miss = parse_double(f[5]);
    e.false_alarm = parse_double(f[6]);
    e.samples = parse_long(f[7]);
    e.collision_reachable = parse_long(f[8]) != 0;
    table.add(e);
  }
  return table;
}

namespace {

std::vector<double> sample_energy(const std::vector<Codebook>& codebooks, int n_users,
                                  const std::vector<double>& size_weights, double rho,
                                  long samples, RngStream& rng) {
  const int alphabet = static_cast<int>(codebooks.front().words.size());
  std::discrete_distribution<int> size_dist(size_weights.begin(), size_weights.end());
  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(samples));
  for (long s = 0; s < samples; ++s) {
    const int n = size_dist(rng.engine());
    ActiveSet set = draw_activity_of_size(n_users, n, rng);
    draw_messages(set, alphabet, rng);
    const ReceivedFrame frame = synthesize_frame(codebooks, set, rho, rng);
    z.push_back(energy_statistic(frame.y));
  }
  return z;
}

}  // namespace

ThresholdEntry calibrate_threshold(const std::vector<Codebook>& codebooks, int n_users, double p,
                                   double rho, long samples, double max_ratio, RngStream& rng) {
  if (codebooks.empty() || codebooks.front().words.empty())
    throw std::invalid_argument("empty codebook family");
  if (n_users < 1 || n_users > static_cast<int>(codebooks.size()))
    throw std::invalid_argument("n_users must lie in 1..number of codebooks");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("activation probability must be in [0,1]");
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  if (!(max_ratio > 0.0) || max_ratio > 1.0)
    throw std::invalid_argument("max_ratio must lie in (0, 1]");

  const int m = static_cast<int>(codebooks.front().words.front().entries.size());
  const int half = m / 2;

  ThresholdEntry entry;
  entry.m = m;
  entry.n_users = n_users;
  entry.p = p;
  entry.rho_db = snr_linear_to_db(rho);
  entry.samples = samples;

  const auto pmf = active_set_size_pmf(n_users, p);
  double p_col = 0.0;
  for (int n = half + 1; n <= n_users; ++n) p_col += pmf[n];

  if (n_users <= half || p_col <= 0.0) {
    entry.t_z = std::numeric_limits<double>::infinity();
    entry.collision_reachable = false;
    return entry;
  }
  entry.collision_reachable = true;

  if (p_col >= 1.0) {
    // every frame is a collision; fire unconditionally
    entry.t_z = -std::numeric_limits<double>::infinity();
    return entry;
  }

  std::vector<double> w_col(pmf.size(), 0.0), w_clear(pmf.size(), 0.0);
  for (int n = 0; n <= n_users; ++n) {
    if (n > half)
      w_col[n] = pmf[n];
    else
      w_clear[n] = pmf[n];
  }

  std::vector<double> z_col = sample_energy(codebooks, n_users, w_col, rho, samples, rng);
  std::vector<double> z_clear = sample_energy(codebooks, n_users, w_clear, rho, samples, rng);
  std::sort(z_col.begin(), z_col.end());
  std::sort(z_clear.begin(), z_clear.end());

  std::vector<double> candidates;
  candidates.reserve(z_col.size() + z_clear.size());
  candidates.insert(candidates.end(), z_col.begin(), z_col.end());
  candidates.insert(candidates.end(), z_clear.begin(), z_clear.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const double ns = static_cast<double>(samples);
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    const double t = *it;
    const double miss =
        static_cast<double>(std::upper_bound(z_col.begin(), z_col.end(), t) - z_col.begin()) / ns;
    const double fa =
        static_cast<double>(z_clear.end() - std::upper_bound(z_clear.begin(), z_clear.end(), t)) /
        ns;
    const double ratio = fa > 0.0 ? miss / fa : (miss == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    if (ratio <= max_ratio) {
      entry.t_z = t;
      entry.miss = miss;
      entry.false_alarm = fa;
      return entry;
    }
  }

  // Below the smallest observed energy: every frame is flagged.
  entry.t_z = candidates.front() - 1.0;
  entry.miss = 0.0;
  entry.false_alarm = 1.0;
  return entry;
}

ZHistograms build_z_histograms(const std::vector<Codebook>& codebooks, int n_users, double rho,
                               long samples_per_size, int bins, RngStream& rng) {
  if (codebooks.empty() || codebooks.front().words.empty())
    throw std::invalid_argument("empty codebook family");
  if (n_users < 1 || n_users > static_cast<int>(codebooks.size()))
    throw std::invalid_argument("n_users must lie in 1..number of codebooks");
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  if (samples_per_size < 1) throw std::invalid_argument("samples_per_size must be positive");
  if (bins < 2) throw std::invalid_argument("need at least two bins");

  const int alphabet = static_cast<int>(codebooks.front().words.size());
  ZHistograms h;
  h.m = static_cast<int>(codebooks.front().words.front().entries.size());
  h.n_users = n_users;
  h.rho = rho;
  h.bins = bins;
  h.samples_per_size = samples_per_size;

  std::vector<std::vector<double>> z_by_size(static_cast<std::size_t>(n_users) + 1);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= n_users; ++n) {
    auto& zs = z_by_size[n];
    zs.reserve(static_cast<std::size_t>(samples_per_size));
    for (long s = 0; s < samples_per_size; ++s) {
      ActiveSet set = draw_activity_of_size(n_users, n, rng);
      draw_messages(set, alphabet, rng);
      const ReceivedFrame frame = synthesize_frame(codebooks, set, rho, rng);
      const double z = energy_statistic(frame.y);
      zs.push_back(z);
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  h.lo = lo;
  h.hi = hi;

  const double width = (hi - lo) / bins;
  const double log_width = std::log(width);
  h.log_density.assign(static_cast<std::size_t>(n_users) + 1,
                       std::vector<double>(static_cast<std::size_t>(bins)));
  for (int n = 0; n <= n_users; ++n) {
    std::vector<long> counts(static_cast<std::size_t>(bins), 0);
    for (double z : z_by_size[n]) {
      int b = static_cast<int>((z - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      ++counts[b];
    }
    for (int b = 0; b < bins; ++b) {
      h.log_density[n][b] =
          std::log(static_cast<double>(counts[b] + 1) /
                   static_cast<double>(samples_per_size + bins)) -
          log_width;
    }
  }
  return h;
}

int nearest_mean_size(double z, int m, double rho, const std::vector<double>& size_pmf,
                      int n_lo, int n_hi) {
  bool any_mass = false;
  for (int n = n_lo; n <= n_hi; ++n)
    if (size_pmf[n] > 0.0) any_mass = true;

  int best = n_lo;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int n = n_lo; n <= n_hi; ++n) {
    if (any_mass && size_pmf[n] <= 0.0) continue;
    const double mean = m + rho * m * n;
    const double gap = std::abs(z - mean);
    if (gap < best_gap) {
      best_gap = gap;
      best = n;
    }
  }
  return best;
}

SizeEstimate estimate_n(double z, int m, int n_users, double p, double rho,
                        const ZHistograms& hists, int n_lo, int n_hi) {
  if (n_hi < 0) n_hi = n_users;
  if (n_lo < 0 || n_lo > n_hi || n_hi > n_users)
    throw std::invalid_argument("size range out of order");
  if (hists.m != m || hists.n_users < n_hi ||
      std::abs(hists.rho - rho) > 1e-9 * std::max(1.0, std::abs(rho)))
    throw std::invalid_argument("histograms calibrated for a different operating point");

  const auto pmf = active_set_size_pmf(n_users, p);

  SizeEstimate est;
  est.n_lo = n_lo;
  est.n_hi = n_hi;
  est.log_posterior.assign(static_cast<std::size_t>(n_hi - n_lo) + 1, kNegInf);

  if (z >= hists.lo && z <= hists.hi) {
    const double width = (hists.hi - hists.lo) / hists.bins;
    int b = static_cast<int>((z - hists.lo) / width);
    b = std::clamp(b, 0, hists.bins - 1);
    int best = -1;
    double best_score = kNegInf;
    for (int n = n_lo; n <= n_hi; ++n) {
      if (pmf[n] <= 0.0) continue;
      const double s = hists.log_density[n][b] + std::log(pmf[n]);
      est.log_posterior[n - n_lo] = s;
      if (best < 0 || s > best_score) {
        best = n;
        best_score = s;
      }
    }
    if (best >= 0) {
      est.n_hat = best;
      return est;
    }
  }

  est.used_fallback = true;
  est.n_hat = nearest_mean_size(z, m, rho, pmf, n_lo, n_hi);
  return est;
}

CalibrationTable calibrate(const std::vector<Codebook>& codebooks, int n_users, double p,
                           double rho, long samples, double max_ratio, int bins,
                           RngStream& rng) {
  CalibrationTable table;
  table.threshold = calibrate_threshold(codebooks, n_users, p, rho, samples, max_ratio, rng);
  table.histograms = build_z_histograms(codebooks, n_users, rho, samples, bins, rng);
  return table;
}

}  // namespace gfra
