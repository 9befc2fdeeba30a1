#include "gfra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfra {

double snr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double snr_linear_to_db(double rho) {
  if (rho <= 0.0) throw std::invalid_argument("snr must be positive");
  return 10.0 * std::log10(rho);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), half_normal_(0.0, std::sqrt(0.5)) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  engine_.seed(seq);
}

std::complex<double> RngStream::complex_gaussian() {
  const double re = half_normal_(engine_);
  const double im = half_normal_(engine_);
  return {re, im};
}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

int RngStream::uniform_int(int hi) {
  return std::uniform_int_distribution<int>(0, hi)(engine_);
}

ActiveSet draw_activity(int n_users, double p, RngStream& rng) {
  if (n_users < 1) throw std::invalid_argument("n_users must be positive");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("activation probability must be in [0,1]");
  ActiveSet set;
  for (int u = 0; u < n_users; ++u)
    if (rng.uniform() < p) set.users.push_back(u);
  return set;
}

ActiveSet draw_activity_of_size(int n_users, int n, RngStream& rng) {
  if (n_users < 1) throw std::invalid_argument("n_users must be positive");
  if (n < 0 || n > n_users) throw std::invalid_argument("subset size out of range");
  std::vector<int> pool(n_users);
  for (int u = 0; u < n_users; ++u) pool[u] = u;
  for (int i = 0; i < n; ++i) {
    const int j = i + rng.uniform_int(n_users - 1 - i);
    std::swap(pool[i], pool[j]);
  }
  ActiveSet set;
  set.users.assign(pool.begin(), pool.begin() + n);
  std::sort(set.users.begin(), set.users.end());
  return set;
}

void draw_messages(ActiveSet& set, int alphabet, RngStream& rng) {
  if (alphabet < 1) throw std::invalid_argument("alphabet must be positive");
  set.messages.resize(set.users.size());
  for (auto& msg : set.messages) msg = rng.uniform_int(alphabet - 1);
}

Eigen::MatrixXcd build_effective_matrix(const std::vector<Codebook>& codebooks,
                                        const ActiveSet& set) {
  if (codebooks.empty() || codebooks.front().words.empty())
    throw std::invalid_argument("empty codebook family");
  if (set.users.size() != set.messages.size())
    throw std::invalid_argument("active set has unmatched users/messages");
  const int m = static_cast<int>(codebooks.front().words.front().entries.size());
  Eigen::MatrixXcd x(m, set.size());
  for (int c = 0; c < set.size(); ++c) {
    const int u = set.users[c];
    const int l = set.messages[c];
    if (u < 0 || u >= static_cast<int>(codebooks.size()))
      throw std::invalid_argument("user index outside codebook family");
    if (l < 0 || l >= static_cast<int>(codebooks[u].words.size()))
      throw std::invalid_argument("message index outside codebook");
    x.col(c) = codebooks[u].words[l].entries;
  }
  return x;
}

namespace {

ReceivedFrame synthesize_from_matrix(const Eigen::MatrixXcd& x, ActiveSet set, double rho,
                                     RngStream& rng, bool zero_noise,
                                     const Eigen::VectorXcd* fixed_h) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();

  ReceivedFrame frame;
  frame.rho = rho;
  frame.truth.active_set = std::move(set);

  if (fixed_h != nullptr) {
    if (fixed_h->size() != n)
      throw std::invalid_argument("fixed coefficient vector has wrong length");
    frame.truth.coefficients = *fixed_h;
  } else {
    frame.truth.coefficients.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) frame.truth.coefficients(i) = rng.complex_gaussian();
  }

  frame.truth.noise = Eigen::VectorXcd::Zero(m);
  if (!zero_noise)
    for (Eigen::Index i = 0; i < m; ++i) frame.truth.noise(i) = rng.complex_gaussian();

  frame.y = std::sqrt(rho * static_cast<double>(m)) * (x * frame.truth.coefficients) +
            frame.truth.noise;
  return frame;
}

}  // namespace

ReceivedFrame synthesize_frame(const std::vector<Codebook>& codebooks, const ActiveSet& set,
                               double rho, RngStream& rng, bool zero_noise,
                               const Eigen::VectorXcd* fixed_h) {
  return synthesize_from_matrix(build_effective_matrix(codebooks, set), set, rho, rng,
                                zero_noise, fixed_h);
}

ReceivedFrame synthesize_frame(const EffectiveCodeword& codeword, double rho, RngStream& rng,
                               bool zero_noise) {
  return synthesize_from_matrix(codeword.matrix, codeword.active_set, rho, rng, zero_noise,
                                nullptr);
}

}  // namespace gfra
