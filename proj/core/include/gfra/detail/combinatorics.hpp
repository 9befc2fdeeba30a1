#pragma once

#include <cstdint>
#include <vector>

namespace gfra::detail {

// Visits every k-subset of {0,...,n-1} in lexicographic order.
template <typename F>
void for_each_combination(int n, int k, F&& visit) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(const_cast<const std::vector<int>&>(idx));
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Visits every k-tuple over {0,...,m-1} in lexicographic order (last digit fastest).
template <typename F>
void for_each_tuple(int k, int m, F&& visit) {
  if (k < 0 || m <= 0) return;
  std::vector<int> digits(k, 0);
  while (true) {
    visit(const_cast<const std::vector<int>&>(digits));
    int i = k - 1;
    while (i >= 0 && digits[i] == m - 1) digits[i--] = 0;
    if (i < 0) return;
    ++digits[i];
  }
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

inline std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace gfra::detail
