#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gfra/gabor.hpp"
#include "gfra/subspace.hpp"

namespace gfra {

// Which users transmitted and which word each one sent. Users are strictly
// increasing; messages[i] belongs to users[i].
struct ActiveSet {
  std::vector<int> users;
  std::vector<int> messages;

  int size() const { return static_cast<int>(users.size()); }
  bool operator==(const ActiveSet&) const = default;
};

// One candidate transmission hypothesis: the stacked codeword columns, their
// cached factorization, and the prior mass of the hypothesis.
struct EffectiveCodeword {
  ActiveSet active_set;
  Eigen::MatrixXcd matrix;  // frame_length x n
  SvdTriple svd;            // empty basis when n == 0
  double prior = 0.0;
  std::int64_t index = 0;   // position in global enumeration order
};

double prior_of(const ActiveSet& set, double p, int n_users, int m);

// P(number of active users = n), n = 0..n_users.
std::vector<double> active_set_size_pmf(int n_users, double p);

// All transmission hypotheses with 0..n_max active users, grouped by size.
// Size-n hypotheses are ordered by user subset (lexicographic), then message
// tuple (lexicographic); global indices concatenate the groups in size order,
// with index 0 reserved for the silent hypothesis.
class EffectiveCodebookIndex {
 public:
  EffectiveCodebookIndex(std::vector<Codebook> codebooks, int n_users, double p, int n_max);

  int frame_length() const { return m_; }
  int num_users() const { return n_users_; }
  double activation_prob() const { return p_; }
  int max_active() const { return n_max_; }

  const std::vector<EffectiveCodeword>& of_size(int n) const;
  const EffectiveCodeword& at(std::int64_t global_index) const;
  std::int64_t total_size() const { return total_; }

  const std::vector<Codebook>& codebooks() const { return codebooks_; }

 private:
  std::vector<Codebook> codebooks_;
  int n_users_ = 0;
  double p_ = 0.0;
  int m_ = 0;
  int n_max_ = 0;
  std::vector<std::vector<EffectiveCodeword>> by_size_;
  std::vector<std::int64_t> offsets_;
  std::int64_t total_ = 0;
};

inline EffectiveCodebookIndex enumerate_effective_codebook(std::vector<Codebook> codebooks,
                                                           int n_users, double p, int n_max) {
  return EffectiveCodebookIndex(std::move(codebooks), n_users, p, n_max);
}

}  // namespace gfra
