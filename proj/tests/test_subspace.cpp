#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gfra/subspace.hpp"
#include "support/oracles.hpp"

using namespace gfra;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = std::complex<double>(g(gen), g(gen));
  return x;
}

}  // namespace

TEST_CASE("two words from different codebooks span at the known angles") {
  const auto books = build_codebooks(FrameConfig{5});
  Eigen::MatrixXcd x(5, 2);
  x.col(0) = books[0].words[0].entries;
  x.col(1) = books[1].words[0].entries;

  const SvdTriple t = svd_decompose(x);
  // Gram spectrum of two unit vectors at |<a,b>| = 1/sqrt(5)
  CHECK(t.eigenvalues(0) == doctest::Approx(1.0 + 1.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(t.eigenvalues(1) == doctest::Approx(1.0 - 1.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("factorization reconstructs and is deterministic") {
  const Eigen::MatrixXcd x = random_matrix(6, 3, 42);
  const SvdTriple a = svd_decompose(x);
  const SvdTriple b = svd_decompose(x);

  CHECK((a.reconstruct() - x).norm() < 1e-12);
  CHECK((a.basis.columns - b.basis.columns).norm() == 0.0);
  CHECK((a.right - b.right).norm() == 0.0);

  // basis orthonormal, eigenvalues descending, phase pinned real-positive
  const auto& B = a.basis.columns;
  CHECK((B.adjoint() * B - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-13);
  CHECK(a.eigenvalues(0) >= a.eigenvalues(1));
  CHECK(a.eigenvalues(1) >= a.eigenvalues(2));
  for (int j = 0; j < B.cols(); ++j) {
    int lead = 0;
    while (lead < B.rows() && std::abs(B(lead, j)) <= 1e-12) ++lead;
    REQUIRE(lead < B.rows());
    CHECK(std::abs(B(lead, j).imag()) < 1e-13);
    CHECK(B(lead, j).real() > 0.0);
  }
}

TEST_CASE("principal angles hit the boundary cases") {
  Eigen::MatrixXcd e01 = Eigen::MatrixXcd::Zero(4, 2);
  e01(0, 0) = 1.0;
  e01(1, 1) = 1.0;
  Eigen::MatrixXcd e23 = Eigen::MatrixXcd::Zero(4, 2);
  e23(2, 0) = 1.0;
  e23(3, 1) = 1.0;

  const SubspaceBasis a{e01}, b{e23};
  const Eigen::VectorXd same = principal_angles(a, a);
  CHECK(same.maxCoeff() < 1e-7);
  const Eigen::VectorXd perp = principal_angles(a, b);
  CHECK(perp.minCoeff() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));

  CHECK(chordal_distance(a, a) < 1e-7);
  CHECK(chordal_distance(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("chordal distance ignores the basis representative") {
  const SvdTriple t = svd_decompose(random_matrix(6, 2, 7));
  Eigen::Matrix2cd rot;
  rot << std::complex<double>(0.6, 0.0), std::complex<double>(0.0, 0.8),
      std::complex<double>(0.0, 0.8), std::complex<double>(0.6, 0.0);
  const SubspaceBasis rotated{t.basis.columns * rot};  // rot is unitary
  CHECK(chordal_distance(t.basis, rotated) < 1e-7);
}

TEST_CASE("frobenius shortcut matches the angle construction") {
  for (unsigned s = 0; s < 20; ++s) {
    const SvdTriple a = svd_decompose(random_matrix(7, 3, 100 + s));
    const SvdTriple b = svd_decompose(random_matrix(7, 3, 200 + s));
    const double fast = chordal_distance(a.basis, b.basis);
    const double slow = oracles::chordal_distance(a.basis, b.basis);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
  }
}

TEST_CASE("exhaustive pair scan reproduces the known minima") {
  const DistanceScanReport rep = verify_min_distance(FrameConfig{5}, 2, PairScan::kExhaustive);
  REQUIRE(rep.per_size.size() == 2);

  // size 1: 25 lines, all pairwise |<a,b>| in {0, 1/sqrt 5} -> min d = sqrt(1 - 1/5)
  CHECK(rep.per_size[0].pairs_checked == 300);  // C(25,2)
  CHECK(rep.per_size[0].min_distance == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));

  // size 2: 10 user pairs x 25 message pairs = 250 planes
  CHECK(rep.per_size[1].pairs_checked == 31125);  // C(250,2)
  CHECK(rep.per_size[1].min_distance > 0.58);
  CHECK(rep.per_size[1].min_distance < 0.59);

  CHECK(rep.ok());
  CHECK(rep.total_violations() == 0);
  CHECK(rep.min_distance() == doctest::Approx(rep.per_size[1].min_distance));
}

TEST_CASE("sampled pair scan is seeded and bounded") {
  const DistanceScanReport a =
      verify_min_distance(FrameConfig{7}, 2, PairScan::kSampled, 1e-6, 2000, 9);
  const DistanceScanReport b =
      verify_min_distance(FrameConfig{7}, 2, PairScan::kSampled, 1e-6, 2000, 9);
  REQUIRE(a.per_size.size() == 2);
  for (int n = 0; n < 2; ++n) {
    CHECK(a.per_size[n].pairs_checked == 2000);
    CHECK(a.per_size[n].violations == 0);
    CHECK(a.per_size[n].min_distance == b.per_size[n].min_distance);
  }
}

TEST_CASE("scan rejects sizes past the ambiguity limit") {
  CHECK_THROWS_AS(verify_min_distance(FrameConfig{5}, 3, PairScan::kExhaustive),
                  std::invalid_argument);
}

TEST_CASE("distance report serializes with its parameters") {
  const DistanceScanReport rep =
      verify_min_distance(FrameConfig{5}, 1, PairScan::kExhaustive);
  std::ostringstream os;
  write_distance_scan_csv(rep, os);
  const std::string text = os.str();
  CHECK(text.find("frame_length=5") != std::string::npos);
  CHECK(text.find("min_gap=") != std::string::npos);
  CHECK(text.find("n_active,mode,pairs_checked,min_distance,violations") != std::string::npos);
  CHECK(text.find("exhaustive") != std::string::npos);
}
