#include "gfra/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "gfra/csv.hpp"
#include "gfra/detail/combinatorics.hpp"

namespace gfra {

Eigen::MatrixXcd SvdTriple::reconstruct() const {
  return basis.columns * eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal() * right;
}

SvdTriple svd_decompose(const Eigen::MatrixXcd& x) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  if (rows < 1 || cols < 1 || cols > rows)
    throw std::invalid_argument("svd_decompose expects a tall matrix with 1..rows columns");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdTriple t;
  t.basis.columns = svd.matrixU();
  t.eigenvalues = svd.singularValues().array().square();
  t.right = svd.matrixV().adjoint();

  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const std::complex<double> v = t.basis.columns(i, j);
      if (std::abs(v) > 1e-12) {
        const std::complex<double> phase = v / std::abs(v);
        t.basis.columns.col(j) *= std::conj(phase);
        t.right.row(j) *= phase;
        break;
      }
    }
  }
  return t;
}

Eigen::VectorXd principal_angles(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("principal_angles: ambient dimensions differ");
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("principal_angles: subspace dimensions differ");
  if (a.dimension() < 1) throw std::invalid_argument("principal_angles: empty subspace");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.columns.adjoint() * b.columns);
  Eigen::VectorXd sigma = svd.singularValues();
  Eigen::VectorXd theta(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    theta(i) = std::acos(std::clamp(sigma(i), 0.0, 1.0));
  std::sort(theta.data(), theta.data() + theta.size());
  return theta;
}

double chordal_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("chordal_distance: ambient dimensions differ");
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("chordal_distance: subspace dimensions differ");
  const double m = static_cast<double>(a.dimension());
  const double overlap = (a.columns.adjoint() * b.columns).squaredNorm();
  return std::sqrt(std::clamp(m - overlap, 0.0, m));
}

double DistanceScanReport::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : per_size) best = std::min(best, e.min_distance);
  return best;
}

std::uint64_t DistanceScanReport::total_violations() const {
  std::uint64_t v = 0;
  for (const auto& e : per_size) v += e.violations;
  return v;
}

namespace {

// Orthonormal bases of the spans of every size-n effective matrix, in
// enumeration order (user subsets lexicographic, message tuples lexicographic).
std::vector<Eigen::MatrixXcd> bases_of_size(const std::vector<Codebook>& books, int m, int n) {
  std::vector<Eigen::MatrixXcd> bases;
  bases.reserve(detail::binomial(m, n) * detail::ipow(static_cast<std::uint64_t>(m), n));
  detail::for_each_combination(m, n, [&](const std::vector<int>& users) {
    detail::for_each_tuple(n, m, [&](const std::vector<int>& msgs) {
      Eigen::MatrixXcd x(m, n);
      for (int c = 0; c < n; ++c) x.col(c) = books[users[c]].words[msgs[c]].entries;
      bases.push_back(svd_decompose(x).basis.columns);
    });
  });
  return bases;
}

double pair_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double m = static_cast<double>(a.cols());
  const double overlap = (a.adjoint() * b).squaredNorm();
  return std::sqrt(std::clamp(m - overlap, 0.0, m));
}

}  // namespace

DistanceScanReport verify_min_distance(const FrameConfig& cfg, int n_max, PairScan mode,
                                       double min_gap, std::uint64_t sample_pairs,
                                       std::uint64_t seed) {
  validate(cfg);
  const int m = cfg.frame_length;
  if (n_max < 1 || n_max > m / 2)
    throw std::invalid_argument("n_max must lie in 1..floor(frame_length/2)");

  FrameConfig gabor_only = cfg;
  gabor_only.extend_with_standard_basis = false;
  const auto books = build_codebooks(gabor_only);

  DistanceScanReport report;
  report.frame_length = m;
  report.min_gap = min_gap;

  for (int n = 1; n <= n_max; ++n) {
    const auto bases = bases_of_size(books, m, n);
    DistanceScanEntry entry;
    entry.n_active = n;
    entry.mode = mode;
    entry.min_distance = std::numeric_limits<double>::infinity();

    if (mode == PairScan::kExhaustive) {
      for (std::size_t i = 0; i < bases.size(); ++i) {
        for (std::size_t j = i + 1; j < bases.size(); ++j) {
          const double d = pair_distance(bases[i], bases[j]);
          entry.min_distance = std::min(entry.min_distance, d);
          if (d <= min_gap) ++entry.violations;
          ++entry.pairs_checked;
        }
      }
    } else {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
      std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
      for (std::uint64_t s = 0; s < sample_pairs; ++s) {
        std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (j == i) j = pick(rng);
        const double d = pair_distance(bases[i], bases[j]);
        entry.min_distance = std::min(entry.min_distance, d);
        if (d <= min_gap) ++entry.violations;
        ++entry.pairs_checked;
      }
    }
    report.per_size.push_back(entry);
  }
  return report;
}

void write_distance_scan_csv(const DistanceScanReport& report, std::ostream& os) {
  os << "# frame_length=" << report.frame_length << " min_gap=" << fmt_g17(report.min_gap)
     << "\n";
  os << "n_active,mode,pairs_checked,min_distance,violations\n";
  for (const auto& e : report.per_size) {
    os << e.n_active << "," << (e.mode == PairScan::kExhaustive ? "exhaustive" : "sampled")
       << "," << e.pairs_checked << "," << fmt_g17(e.min_distance) << "," << e.violations
       << "\n";
  }
}

}  // namespace gfra
