#pragma once

// Reference implementations used only by the tests. Each one reaches the same
// quantity as the library through a different computational route, so shared
// bugs are unlikely: codewords via direct floating-point phase evaluation,
// chordal distances via explicit principal angles, and the decoder metric via
// the dense covariance form of the Gaussian likelihood.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "gfra/effective.hpp"
#include "gfra/subspace.hpp"

namespace oracles {

// g_{k,l}[i] without modular reduction: the complex exponential is periodic,
// so the raw exponent (i-k)^3 + l*i works directly in double precision.
inline Eigen::VectorXcd gabor_word(int m, int k, int l) {
  Eigen::VectorXcd v(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    const double d = static_cast<double>(i - k);
    const double e = d * d * d + static_cast<double>(l) * i;
    v(i) = std::polar(scale, 2.0 * std::numbers::pi * e / m);
  }
  return v;
}

// Chordal distance through the angles themselves rather than the Frobenius
// shortcut: d = sqrt(sum sin^2(theta_i)).
inline double chordal_distance(const gfra::SubspaceBasis& a, const gfra::SubspaceBasis& b) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.columns.adjoint() * b.columns);
  double sum = 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double c = std::min(1.0, std::max(-1.0, svd.singularValues()(i)));
    const double s = std::sin(std::acos(c));
    sum += s * s;
  }
  return std::sqrt(sum);
}

// Dense covariance form of the decoder metric: y ~ CN(0, I + rho*m*X*X^H)
// under a hypothesis, scored as -y^H S^-1 y - logdet(S) + log prior. Differs
// from the library's whitened form by a hypothesis-independent constant, so
// the argmax must coincide.
struct CovHypothesis {
  Eigen::LLT<Eigen::MatrixXcd> llt;
  double logdet = 0.0;
  double logprior = 0.0;
};

class CovOracle {
 public:
  CovOracle(const gfra::EffectiveCodebookIndex& index, double rho, int n_max) {
    const int m = index.frame_length();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
    for (int n = 0; n <= n_max; ++n) {
      for (const auto& cw : index.of_size(n)) {
        CovHypothesis h;
        Eigen::MatrixXcd sigma = eye;
        if (n > 0) sigma += rho * m * cw.matrix * cw.matrix.adjoint();
        h.llt.compute(sigma);
        for (int i = 0; i < m; ++i) h.logdet += 2.0 * std::log(h.llt.matrixL()(i, i).real());
        h.logprior = cw.prior > 0.0 ? std::log(cw.prior)
                                    : -std::numeric_limits<double>::infinity();
        hyps_.push_back(std::move(h));
      }
    }
  }

  double score(std::size_t i, const Eigen::VectorXcd& y) const {
    const auto& h = hyps_[i];
    const double quad = y.dot(h.llt.solve(y)).real();
    return -quad - h.logdet + h.logprior;
  }

  // First-wins over the global enumeration order, matching the decoder's
  // tie-break.
  std::int64_t argmax(const Eigen::VectorXcd& y) const {
    std::int64_t best = 0;
    double best_score = score(0, y);
    for (std::size_t i = 1; i < hyps_.size(); ++i) {
      const double s = score(i, y);
      if (s > best_score) {
        best_score = s;
        best = static_cast<std::int64_t>(i);
      }
    }
    return best;
  }

  std::size_t size() const { return hyps_.size(); }

 private:
  std::vector<CovHypothesis> hyps_;
};

inline double binomial_pmf(int n, int k, double p) {
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace oracles
