#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gfra/decoder.hpp"
#include "support/oracles.hpp"

using namespace gfra;

namespace {

const std::vector<Codebook>& books5() {
  static const auto books = build_codebooks(FrameConfig{5});
  return books;
}

const EffectiveCodebookIndex& index5() {
  static const EffectiveCodebookIndex index(books5(), 5, 0.2, 5);
  return index;
}

}  // namespace

TEST_CASE("single-word hypothesis scores the closed-form value") {
  // y equal to the hypothesis word itself, rho = 10, m = 5: the one active
  // direction has eigenvalue 1, weight 50/51, projection energy 1, and
  // penalty log(51).
  const Eigen::VectorXcd y = books5()[0].words[0].entries;
  const auto& cw = index5().of_size(1).front();
  REQUIRE(cw.active_set.users == std::vector<int>{0});
  REQUIRE(cw.active_set.messages == std::vector<int>{0});
  const double want = 50.0 / 51.0 - std::log(51.0);
  CHECK(log_likelihood(y, cw, 10.0) == doctest::Approx(want).epsilon(1e-14));
  CHECK(log_likelihood(y, index5().at(0), 10.0) == 0.0);  // silence scores zero
  CHECK_THROWS_AS(log_likelihood(y, cw, 0.0), std::invalid_argument);
}

TEST_CASE("cached decoder matches the one-shot entry point") {
  const MapDecoder dec(index5(), 10.0, -1);
  CHECK(dec.max_size() == 5);
  RngStream rng(31, 0);
  for (int i = 0; i < 25; ++i) {
    ActiveSet set = draw_activity(5, 0.3, rng);
    draw_messages(set, 5, rng);
    const Eigen::VectorXcd y = synthesize_frame(books5(), set, 10.0, rng).y;
    const DecodeResult a = dec.decode(y);
    const DecodeResult b = map_decode(y, index5(), 10.0);
    CHECK(a.index == b.index);
    CHECK(a.metric == doctest::Approx(b.metric).epsilon(1e-12));
  }
}

TEST_CASE("reported metrics locate the winner under first-wins ties") {
  RngStream rng(32, 0);
  for (int i = 0; i < 10; ++i) {
    ActiveSet set = draw_activity(5, 0.3, rng);
    draw_messages(set, 5, rng);
    const Eigen::VectorXcd y = synthesize_frame(books5(), set, 10.0, rng).y;
    const DecodeResult r = map_decode(y, index5(), 10.0, -1, /*keep_metrics=*/true);
    REQUIRE(static_cast<std::int64_t>(r.metrics.size()) == index5().total_size());

    std::int64_t arg = 0;
    for (std::size_t k = 1; k < r.metrics.size(); ++k)
      if (r.metrics[k] > r.metrics[arg]) arg = static_cast<std::int64_t>(k);
    CHECK(arg == r.index);

    // shifting every score by a constant cannot move the argmax
    std::int64_t arg_shift = 0;
    for (std::size_t k = 1; k < r.metrics.size(); ++k)
      if (r.metrics[k] + 17.25 > r.metrics[arg_shift] + 17.25)
        arg_shift = static_cast<std::int64_t>(k);
    CHECK(arg_shift == arg);
  }
}

TEST_CASE("exact ties resolve to the earliest enumeration index") {
  // y = 0 gives every same-size hypothesis an identical score.
  const Eigen::VectorXcd y = Eigen::VectorXcd::Zero(5);
  const DecodeResult r = decode_at_size(y, index5(), 1, 10.0, ProjectionMode::kCorrected);
  CHECK(r.index == index5().of_size(1).front().index);
  CHECK(r.active_set.users == std::vector<int>{0});
  CHECK(r.active_set.messages == std::vector<int>{0});

  // and the full search prefers silence on an empty frame
  const DecodeResult full = map_decode(y, index5(), 10.0);
  CHECK(full.kind == DecodeResult::Kind::kSilent);
  CHECK(full.index == 0);
}

TEST_CASE("known-size search stays inside the requested size") {
  RngStream rng(33, 0);
  ActiveSet set = draw_activity_of_size(5, 2, rng);
  draw_messages(set, 5, rng);
  const Eigen::VectorXcd y = synthesize_frame(books5(), set, 100.0, rng).y;

  for (ProjectionMode mode : {ProjectionMode::kCorrected, ProjectionMode::kPlain}) {
    const DecodeResult r = decode_at_size(y, index5(), 2, 100.0, mode);
    CHECK(r.active_set.size() == 2);
    CHECK(r.kind == DecodeResult::Kind::kCodeword);
  }
  const MapDecoder dec(index5(), 100.0, -1);
  CHECK_THROWS_AS(dec.decode_at_size(y, 6, ProjectionMode::kCorrected),
                  std::invalid_argument);
  CHECK_THROWS_AS(dec.decode_map_at_size(y, -1), std::invalid_argument);
}

TEST_CASE("weighted projection equals in-size map search below the ambiguity limit") {
  // All size-2 hypotheses share the gram spectrum {1 +- 1/sqrt 5}, so the
  // determinant penalty is constant within the group and the two rules must
  // pick the same winner.
  const MapDecoder dec(index5(), 10.0, -1);
  RngStream rng(34, 0);
  for (int i = 0; i < 60; ++i) {
    ActiveSet set = draw_activity_of_size(5, 2, rng);
    draw_messages(set, 5, rng);
    const Eigen::VectorXcd y = synthesize_frame(books5(), set, 10.0, rng).y;
    for (int n : {1, 2}) {
      const DecodeResult a = dec.decode_at_size(y, n, ProjectionMode::kCorrected);
      const DecodeResult b = dec.decode_map_at_size(y, n);
      CHECK(a.index == b.index);
    }
  }
}

TEST_CASE("decoder cap cannot exceed the enumerated sizes") {
  const EffectiveCodebookIndex small(books5(), 5, 0.2, 2);
  CHECK_THROWS_AS(MapDecoder(small, 10.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(MapDecoder(small, 0.0, 2), std::invalid_argument);
  CHECK(MapDecoder(small, 10.0, -1).max_size() == 2);
}

TEST_CASE("energy statistic is the squared norm") {
  Eigen::VectorXcd y(2);
  y << std::complex<double>(3.0, 4.0), std::complex<double>(0.0, 2.0);
  CHECK(energy_statistic(y) == doctest::Approx(29.0).epsilon(1e-15));
}

TEST_CASE("threshold calibration hits the documented sentinels") {
  RngStream rng(35, 0);
  // two users can never exceed floor(5/2): detector never fires
  const ThresholdEntry quiet = calibrate_threshold(books5(), 2, 0.5, 10.0, 500, 0.5, rng);
  CHECK(quiet.t_z == std::numeric_limits<double>::infinity());
  CHECK_FALSE(quiet.collision_reachable);

  // certain collision: detector always fires
  const ThresholdEntry loud = calibrate_threshold(books5(), 5, 1.0, 10.0, 500, 0.5, rng);
  CHECK(loud.t_z == -std::numeric_limits<double>::infinity());
  CHECK(loud.collision_reachable);

  // impossible collision despite enough users
  const ThresholdEntry silent = calibrate_threshold(books5(), 5, 0.0, 10.0, 500, 0.5, rng);
  CHECK(silent.t_z == std::numeric_limits<double>::infinity());
  CHECK_FALSE(silent.collision_reachable);
}

TEST_CASE("calibrated threshold respects the ratio budget and grows with it") {
  auto run = [](double max_ratio) {
    RngStream rng(36, 9);
    return calibrate_threshold(books5(), 5, 0.4, 10.0, 4000, max_ratio, rng);
  };
  const ThresholdEntry tight = run(0.5);
  const ThresholdEntry loose = run(1.0);

  CHECK(std::isfinite(tight.t_z));
  CHECK(tight.collision_reachable);
  if (tight.false_alarm > 0.0) CHECK(tight.miss / tight.false_alarm <= 0.5 + 1e-12);
  CHECK(tight.t_z <= loose.t_z);  // a looser budget admits a larger threshold

  // identical stream, identical answer
  const ThresholdEntry again = run(0.5);
  CHECK(again.t_z == tight.t_z);
  CHECK(again.miss == tight.miss);
  CHECK(again.false_alarm == tight.false_alarm);

  RngStream rng(37, 0);
  CHECK_THROWS_AS(calibrate_threshold(books5(), 5, 0.4, 10.0, 100, 0.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(books5(), 5, 0.4, 10.0, 100, 1.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(books5(), 5, 0.4, 10.0, 0, 0.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(books5(), 5, 1.2, 10.0, 100, 0.5, rng),
                  std::invalid_argument);
}

TEST_CASE("threshold table keys round to the operating point") {
  ThresholdTable table;
  ThresholdEntry e;
  e.m = 5;
  e.n_users = 5;
  e.p = 0.4;
  e.rho_db = 10.0;
  e.t_z = 123.456;
  e.miss = 0.01;
  e.false_alarm = 0.03;
  e.samples = 9999;
  e.collision_reachable = true;
  table.add(e);

  REQUIRE(table.find(5, 5, 0.4, 10.0) != nullptr);
  CHECK(table.find(5, 5, 0.4, 10.0 + 1e-12) != nullptr);  // tolerant key match
  CHECK(table.find(5, 5, 0.4, 10.1) == nullptr);
  CHECK(table.find(5, 4, 0.4, 10.0) == nullptr);
  CHECK(table.find(7, 5, 0.4, 10.0) == nullptr);
}

TEST_CASE("threshold table serialization round-trips including sentinels") {
  ThresholdTable table;
  RngStream rng(38, 0);
  table.add(calibrate_threshold(books5(), 5, 0.4, 10.0, 1000, 0.5, rng));
  table.add(calibrate_threshold(books5(), 2, 0.5, 10.0, 100, 0.5, rng));   // +inf
  table.add(calibrate_threshold(books5(), 5, 1.0, 10.0, 100, 0.5, rng));   // -inf

  std::ostringstream os;
  table.save(os);
  std::istringstream is(os.str());
  const ThresholdTable back = ThresholdTable::load(is);

  REQUIRE(back.entries().size() == table.entries().size());
  for (std::size_t i = 0; i < table.entries().size(); ++i) {
    const auto& a = table.entries()[i];
    const auto& b = back.entries()[i];
    CHECK(a.m == b.m);
    CHECK(a.n_users == b.n_users);
    CHECK(a.p == b.p);
    CHECK(a.rho_db == b.rho_db);
    CHECK((a.t_z == b.t_z || (std::isinf(a.t_z) && std::isinf(b.t_z) &&
                              std::signbit(a.t_z) == std::signbit(b.t_z))));
    CHECK(a.miss == b.miss);
    CHECK(a.false_alarm == b.false_alarm);
    CHECK(a.samples == b.samples);
    CHECK(a.collision_reachable == b.collision_reachable);
  }
}

TEST_CASE("pooled histograms are smoothed proper densities") {
  RngStream rng(39, 0);
  const ZHistograms h = build_z_histograms(books5(), 5, 10.0, 2000, 200, rng);
  CHECK(h.m == 5);
  CHECK(h.n_users == 5);
  CHECK(h.bins == 200);
  CHECK(h.lo < h.hi);
  REQUIRE(h.log_density.size() == 6);
  const double width = (h.hi - h.lo) / h.bins;
  for (const auto& row : h.log_density) {
    REQUIRE(static_cast<int>(row.size()) == h.bins);
    double mass = 0.0;
    for (double ld : row) {
      CHECK(std::isfinite(ld));  // add-one smoothing leaves no holes
      mass += std::exp(ld) * width;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }

  RngStream rng2(39, 1);
  CHECK_THROWS_AS(build_z_histograms(books5(), 5, 10.0, 0, 200, rng2), std::invalid_argument);
  CHECK_THROWS_AS(build_z_histograms(books5(), 5, 10.0, 100, 1, rng2), std::invalid_argument);
}

TEST_CASE("size estimation is histogram-map in support with a nearest-mean fallback") {
  RngStream rng(40, 0);
  const double rho = 100.0;
  const ZHistograms h = build_z_histograms(books5(), 5, rho, 20000, 200, rng);

  // a bare-noise energy sits squarely in the silent bin
  const SizeEstimate quiet = estimate_n(5.0, 5, 5, 0.2, rho, h);
  CHECK(quiet.n_hat == 0);
  CHECK_FALSE(quiet.used_fallback);
  REQUIRE(quiet.log_posterior.size() == 6);
  CHECK(quiet.log_posterior[0] > quiet.log_posterior[2]);

  // range restriction forces the estimate into the window
  const SizeEstimate windowed = estimate_n(5.0, 5, 5, 0.2, rho, h, 1, 3);
  CHECK(windowed.n_hat >= 1);
  CHECK(windowed.n_hat <= 3);
  CHECK(windowed.n_hat == 1);

  // outside the pooled support the nearest conditional mean takes over
  const SizeEstimate above = estimate_n(h.hi + 5000.0, 5, 5, 0.2, rho, h);
  CHECK(above.used_fallback);
  CHECK(above.n_hat == 5);
  const SizeEstimate below = estimate_n(h.lo - 10.0, 5, 5, 0.2, rho, h);
  CHECK(below.used_fallback);
  CHECK(below.n_hat == 0);

  CHECK_THROWS_AS(estimate_n(5.0, 5, 5, 0.2, rho, h, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(estimate_n(5.0, 7, 5, 0.2, rho, h), std::invalid_argument);
  CHECK_THROWS_AS(estimate_n(5.0, 5, 5, 0.2, rho + 0.1, h), std::invalid_argument);
}

TEST_CASE("nearest mean splits at the midpoints and honors the prior mask") {
  const auto pmf = active_set_size_pmf(5, 0.2);
  // means at rho=100, m=5: 5, 505, 1005, ...
  CHECK(nearest_mean_size(760.0, 5, 100.0, pmf, 0, 5) == 2);
  CHECK(nearest_mean_size(750.0, 5, 100.0, pmf, 0, 5) == 1);
  CHECK(nearest_mean_size(755.0, 5, 100.0, pmf, 0, 5) == 1);  // exact tie -> smaller size
  CHECK(nearest_mean_size(1.0e9, 5, 100.0, pmf, 0, 5) == 5);
  CHECK(nearest_mean_size(0.0, 5, 100.0, pmf, 2, 4) == 2);  // clipped to the window

  std::vector<double> masked = {0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(nearest_mean_size(5.0, 5, 100.0, masked, 0, 5) == 1);  // zero-mass sizes skipped
  std::vector<double> empty(6, 0.0);
  CHECK(nearest_mean_size(5.0, 5, 100.0, empty, 0, 5) == 0);  // mask ignored when all-zero
}

TEST_CASE("joint calibration bundles a matching threshold and histograms") {
  RngStream rng(41, 0);
  const CalibrationTable t = calibrate(books5(), 5, 0.4, 10.0, 1500, 0.5, 100, rng);
  CHECK(t.threshold.m == 5);
  CHECK(t.threshold.n_users == 5);
  CHECK(t.threshold.p == 0.4);
  CHECK(std::isfinite(t.threshold.t_z));
  CHECK(t.histograms.m == 5);
  CHECK(t.histograms.rho == doctest::Approx(10.0));
  CHECK(t.histograms.bins == 100);
}
