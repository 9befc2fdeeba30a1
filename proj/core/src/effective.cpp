#include "gfra/effective.hpp"

#include <cmath>
#include <stdexcept>

#include "gfra/detail/combinatorics.hpp"

namespace gfra {

double prior_of(const ActiveSet& set, double p, int n_users, int m) {
  const int n = set.size();
  return std::pow(p, n) * std::pow(1.0 - p, n_users - n) /
         static_cast<double>(detail::ipow(static_cast<std::uint64_t>(m), n));
}

std::vector<double> active_set_size_pmf(int n_users, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n_users) + 1);
  for (int n = 0; n <= n_users; ++n)
    pmf[n] = static_cast<double>(detail::binomial(n_users, n)) * std::pow(p, n) *
             std::pow(1.0 - p, n_users - n);
  return pmf;
}

EffectiveCodebookIndex::EffectiveCodebookIndex(std::vector<Codebook> codebooks, int n_users,
                                               double p, int n_max)
    : codebooks_(std::move(codebooks)), n_users_(n_users), p_(p), n_max_(n_max) {
  if (codebooks_.empty() || codebooks_.front().words.empty())
    throw std::invalid_argument("effective codebook needs at least one codebook");
  if (n_users_ < 1 || n_users_ > static_cast<int>(codebooks_.size()))
    throw std::invalid_argument("n_users must lie in 1..number of codebooks");
  if (p_ < 0.0 || p_ > 1.0) throw std::invalid_argument("activation probability must be in [0,1]");
  if (n_max_ < 0 || n_max_ > n_users_)
    throw std::invalid_argument("n_max must lie in 0..n_users");
  m_ = static_cast<int>(codebooks_.front().words.front().entries.size());
  const int words_per_book = static_cast<int>(codebooks_.front().words.size());

  by_size_.resize(static_cast<std::size_t>(n_max_) + 1);
  offsets_.resize(static_cast<std::size_t>(n_max_) + 2, 0);

  std::int64_t next = 0;
  for (int n = 0; n <= n_max_; ++n) {
    auto& group = by_size_[n];
    group.reserve(detail::binomial(n_users_, n) *
                  detail::ipow(static_cast<std::uint64_t>(words_per_book), n));
    detail::for_each_combination(n_users_, n, [&](const std::vector<int>& users) {
      detail::for_each_tuple(n, words_per_book, [&](const std::vector<int>& msgs) {
        EffectiveCodeword cw;
        cw.active_set = ActiveSet{users, msgs};
        cw.matrix.resize(m_, n);
        for (int c = 0; c < n; ++c) cw.matrix.col(c) = codebooks_[users[c]].words[msgs[c]].entries;
        if (n > 0) {
          cw.svd = svd_decompose(cw.matrix);
        } else {
          cw.svd.basis.columns.resize(m_, 0);
          cw.svd.eigenvalues.resize(0);
          cw.svd.right.resize(0, 0);
        }
        cw.prior = prior_of(cw.active_set, p_, n_users_, words_per_book);
        cw.index = next++;
        group.push_back(std::move(cw));
      });
    });
    offsets_[n + 1] = next;
  }
  total_ = next;
}

const std::vector<EffectiveCodeword>& EffectiveCodebookIndex::of_size(int n) const {
  if (n < 0 || n > n_max_) throw std::out_of_range("no hypotheses of that size");
  return by_size_[n];
}

const EffectiveCodeword& EffectiveCodebookIndex::at(std::int64_t global_index) const {
  if (global_index < 0 || global_index >= total_) throw std::out_of_range("global index out of range");
  int n = 0;
  while (offsets_[n + 1] <= global_index) ++n;
  return by_size_[n][static_cast<std::size_t>(global_index - offsets_[n])];
}

}  // namespace gfra
