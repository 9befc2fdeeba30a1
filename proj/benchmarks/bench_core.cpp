#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include <gfra/channel.hpp>
#include <gfra/decoder.hpp>
#include <gfra/effective.hpp>
#include <gfra/gabor.hpp>
#include <gfra/protocol.hpp>
#include <gfra/subspace.hpp>

namespace {

using namespace gfra;

FrameConfig frame_cfg(int m) {
  FrameConfig cfg;
  cfg.frame_length = m;
  return cfg;
}

void BM_BuildCodebooks(benchmark::State& state) {
  const FrameConfig cfg = frame_cfg(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto books = build_codebooks(cfg);
    benchmark::DoNotOptimize(books);
  }
}
BENCHMARK(BM_BuildCodebooks)->Arg(5)->Arg(7)->Arg(11)->Arg(13);

// Index construction factorizes every effective codeword, so this measures
// the up-front SVD cost the decoder amortizes.
void BM_EffectiveIndex(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const int n_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    EffectiveCodebookIndex index(books, 5, 0.2, n_max);
    benchmark::DoNotOptimize(index);
  }
  state.SetItemsProcessed(state.iterations() *
                          EffectiveCodebookIndex(books, 5, 0.2, n_max).total_size());
}
BENCHMARK(BM_EffectiveIndex)->Arg(2)->Arg(5);

void BM_ChordalDistance(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const EffectiveCodebookIndex index(books, 5, 0.2, 2);
  const auto& pairs = index.of_size(2);
  const auto& a = pairs.front().svd.basis;
  const auto& b = pairs.back().svd.basis;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chordal_distance(a, b));
  }
}
BENCHMARK(BM_ChordalDistance);

void BM_MapDecode(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const int n_max = static_cast<int>(state.range(0));
  const EffectiveCodebookIndex index(books, 5, 0.2, n_max);
  const MapDecoder decoder(index, 10.0);
  RngStream rng(1234);
  const ActiveSet set{{0, 2}, {1, 4}};
  const auto frame = synthesize_frame(books, set, 10.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoder.decode(frame.y));
  }
  state.SetItemsProcessed(state.iterations() * index.total_size());
}
BENCHMARK(BM_MapDecode)->Arg(2)->Arg(5);

void BM_DecodeAtSize(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const EffectiveCodebookIndex index(books, 5, 0.2, 2);
  const MapDecoder decoder(index, 10.0);
  RngStream rng(1234);
  const ActiveSet set{{0, 2}, {1, 4}};
  const auto frame = synthesize_frame(books, set, 10.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoder.decode_at_size(frame.y, 2, ProjectionMode::kCorrected));
  }
}
BENCHMARK(BM_DecodeAtSize);

void BM_ThresholdCalibration(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const long samples = state.range(0);
  for (auto _ : state) {
    RngStream rng(99, 7);
    benchmark::DoNotOptimize(calibrate_threshold(books, 5, 0.6, 10.0, samples, 0.5, rng));
  }
  state.SetItemsProcessed(state.iterations() * samples);
}
BENCHMARK(BM_ThresholdCalibration)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ProtocolFrame(benchmark::State& state) {
  const auto books = build_codebooks(frame_cfg(5));
  const EffectiveCodebookIndex index(books, 5, 0.4, 2);
  const MapDecoder decoder(index, 10.0);
  RngStream cal_rng(7, 1);
  const CalibrationTable calib = calibrate(books, 5, 0.4, 10.0, 5000, 0.5, 200, cal_rng);
  ProtocolConfig cfg;
  RngStream rng(42, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_frame(cfg, decoder, calib, rng));
  }
}
BENCHMARK(BM_ProtocolFrame)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
