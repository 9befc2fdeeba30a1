#include "gfra/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gfra/csv.hpp"

namespace gfra {
namespace {

// exp(2*pi*i * e / m) for an integer exponent already reduced mod m
std::complex<double> unit_phase(long long e, int m, double scale) {
  return std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>(e) / m);
}

long long cube_mod(long long x, long long m) {
  long long r = ((x % m) + m) % m;
  return r * r % m * r % m;
}

}  // namespace

bool is_prime(int m) {
  if (m < 2) return false;
  for (int d = 2; static_cast<long long>(d) * d <= m; ++d)
    if (m % d == 0) return false;
  return true;
}

void validate(const FrameConfig& cfg) {
  if (cfg.frame_length < 5 || !is_prime(cfg.frame_length))
    throw std::invalid_argument("frame_length must be a prime >= 5, got " +
                                std::to_string(cfg.frame_length));
}

Eigen::MatrixXcd Codebook::matrix() const {
  if (words.empty()) return {};
  Eigen::MatrixXcd m(words.front().entries.size(), words.size());
  for (std::size_t l = 0; l < words.size(); ++l) m.col(static_cast<Eigen::Index>(l)) = words[l].entries;
  return m;
}

Eigen::VectorXcd alltop_sequence(int m) {
  validate(FrameConfig{m});
  Eigen::VectorXcd v(m);
  for (int i = 0; i < m; ++i) v(i) = unit_phase(cube_mod(i, m), m, 1.0);
  return v;
}

Codeword gabor_codeword(const FrameConfig& cfg, int user, int message) {
  validate(cfg);
  const int m = cfg.frame_length;
  if (user < 0 || user >= m) throw std::invalid_argument("user index out of range");
  if (message < 0 || message >= m) throw std::invalid_argument("message index out of range");
  const double scale = cfg.normalize ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
  Codeword w{user, message, Eigen::VectorXcd(m)};
  for (int i = 0; i < m; ++i) {
    long long e = (cube_mod(i - user, m) + static_cast<long long>(message) * i) % m;
    w.entries(i) = unit_phase(e, m, scale);
  }
  return w;
}

std::vector<Codebook> build_codebooks(const FrameConfig& cfg) {
  validate(cfg);
  const int m = cfg.frame_length;
  std::vector<Codebook> books;
  books.reserve(static_cast<std::size_t>(m) + (cfg.extend_with_standard_basis ? 1 : 0));
  for (int k = 0; k < m; ++k) {
    Codebook b{k, {}};
    b.words.reserve(m);
    for (int l = 0; l < m; ++l) b.words.push_back(gabor_codeword(cfg, k, l));
    books.push_back(std::move(b));
  }
  if (cfg.extend_with_standard_basis) {
    Codebook b{m, {}};
    b.words.reserve(m);
    for (int l = 0; l < m; ++l) {
      Codeword w{m, l, Eigen::VectorXcd::Zero(m)};
      w.entries(l) = 1.0;
      b.words.push_back(std::move(w));
    }
    books.push_back(std::move(b));
  }
  return books;
}

CoherenceReport verify_coherence(const std::vector<Codebook>& codebooks, double tol) {
  if (codebooks.empty() || codebooks.front().words.empty())
    throw std::invalid_argument("empty codebook family");
  const int m = static_cast<int>(codebooks.front().words.front().entries.size());
  const double cross = 1.0 / std::sqrt(static_cast<double>(m));

  CoherenceReport report;
  std::vector<double> mags;
  struct Ref {
    const Codeword* w;
  };
  std::vector<Ref> all;
  for (const auto& b : codebooks)
    for (const auto& w : b.words) all.push_back({&w});

  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      const Codeword& wa = *all[a].w;
      const Codeword& wb = *all[b].w;
      const double mag = std::abs(wa.entries.dot(wb.entries));
      mags.push_back(mag);
      const bool same_book = wa.user == wb.user;
      const bool near_zero = mag <= tol;
      const bool near_cross = std::abs(mag - cross) <= tol;
      const bool ok = same_book ? near_zero : (near_zero || near_cross);
      if (!ok) report.violations.push_back({wa.user, wa.message, wb.user, wb.message, mag});
      if (!same_book && mag > report.max_cross) report.max_cross = mag;
    }
  }

  std::sort(mags.begin(), mags.end());
  for (double v : mags) {
    if (report.observed.empty() || v - report.observed.back() > tol) report.observed.push_back(v);
  }
  return report;
}

void write_codebook_csv(const std::vector<Codebook>& codebooks, std::ostream& os) {
  if (codebooks.empty()) return;
  const auto n = codebooks.front().words.front().entries.size();
  os << "k,l";
  for (Eigen::Index i = 0; i < n; ++i) os << ",re" << i << ",im" << i;
  os << "\n";
  for (const auto& b : codebooks) {
    for (const auto& w : b.words) {
      os << w.user << "," << w.message;
      for (Eigen::Index i = 0; i < n; ++i)
        os << "," << fmt_g17(w.entries(i).real()) << "," << fmt_g17(w.entries(i).imag());
      os << "\n";
    }
  }
}

}  // namespace gfra
