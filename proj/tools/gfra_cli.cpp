#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gfra/channel.hpp"
#include "gfra/csv.hpp"
#include "gfra/decoder.hpp"
#include "gfra/experiment.hpp"
#include "gfra/gabor.hpp"
#include "gfra/subspace.hpp"
#include "gfra/version.hpp"

namespace {

struct SweepArgs {
  gfra::ExperimentConfig cfg;
  std::vector<double> pc_values;
  bool pc_adaptive = false;
  std::string mode = "known_n";
  std::string out;
  std::string trace;
  std::string tables;
  std::string plot_stem;
};

void add_sweep_options(CLI::App* sub, SweepArgs& args, bool blind) {
  sub->add_option("--m", args.cfg.m, "Frame length (prime >= 5)")->capture_default_str();
  sub->add_option("--n-users", args.cfg.n_users, "Number of users")->capture_default_str();
  sub->add_option("--p", args.cfg.p, "Per-user activation probability")->capture_default_str();
  sub->add_option("--snr-db", args.cfg.snr_db, "SNR grid in dB")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--frames", args.cfg.frames, "Frames per grid point")->capture_default_str();
  sub->add_option("--seed", args.cfg.seed, "Master seed")->capture_default_str();
  sub->add_option("--mode", args.mode, "Decoder mode: map | known_n | plain")
      ->check(CLI::IsMember({"map", "known_n", "plain"}))
      ->capture_default_str();
  sub->add_option("--nmax", args.cfg.n_max,
                  "Hypothesis-size cap (-1 = floor(m/2))")
      ->capture_default_str();
  sub->add_option("--calib-samples", args.cfg.calibration_samples,
                  "Monte Carlo samples per calibration branch")
      ->capture_default_str();
  sub->add_option("--max-ratio", args.cfg.max_ratio,
                  "Calibration miss/false-alarm ratio bound, in (0,1]")
      ->capture_default_str();
  sub->add_option("--bins", args.cfg.histogram_bins, "Energy histogram bins")
      ->capture_default_str();
  sub->add_option("--threads", args.cfg.threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  sub->add_flag("--extend", args.cfg.extend_with_standard_basis,
                "Append the standard basis as an extra codebook");
  sub->add_option("--out", args.out, "Write results CSV here");
  sub->add_option("--plot", args.plot_stem, "Also write <stem>.csv and <stem>.dat plot files");
  if (blind) {
    sub->add_option("--pc", args.pc_values, "Fixed retransmit probabilities to sweep")
        ->delimiter(',');
    sub->add_flag("--pc-adaptive", args.pc_adaptive,
                  "Include the adaptive retransmit rule (default when --pc is absent)");
    sub->add_option("--rounds", args.cfg.max_resolution_rounds, "Max resolution rounds")
        ->capture_default_str();
    sub->add_option("--tables", args.tables, "Load thresholds from this CSV");
    sub->add_option("--trace", args.trace, "Write the per-frame outcome log here");
  }
}

void finalize_sweep(SweepArgs& args) {
  args.cfg.mode = gfra::decoder_mode_from_string(args.mode);
  std::vector<gfra::PcPoint> pc;
  if (args.pc_adaptive || args.pc_values.empty()) pc.push_back(gfra::PcPoint{true, 1.0});
  for (double v : args.pc_values) pc.push_back(gfra::PcPoint{false, v});
  args.cfg.pc = std::move(pc);
}

void print_results(const std::vector<gfra::FerResult>& results) {
  std::printf("%8s %8s %10s %10s %22s %8s\n", "snr_db", "pc", "fer", "errors", "wilson_95",
              "wall_s");
  for (const auto& r : results) {
    char pc[16];
    if (r.pc < 0)
      std::snprintf(pc, sizeof(pc), "rule");
    else
      std::snprintf(pc, sizeof(pc), "%.3g", r.pc);
    std::printf("%8.3g %8s %10.5g %10ld [%8.5f, %8.5f] %8.2f\n", r.snr_db, pc, r.fer, r.errors,
                r.wilson_lo, r.wilson_hi, r.wall_seconds);
  }
}

void write_results(const std::vector<gfra::FerResult>& results,
                   const gfra::ExperimentConfig& cfg, bool genie, const SweepArgs& args) {
  if (!args.out.empty()) {
    std::ofstream os(args.out);
    if (!os) throw std::runtime_error("cannot open " + args.out);
    gfra::write_fer_csv(results, cfg, genie, os);
  }
  if (!args.plot_stem.empty()) gfra::emit_plot_data(results, cfg, genie, args.plot_stem);
}

int cmd_run(SweepArgs& args) {
  finalize_sweep(args);
  gfra::ThresholdTable table;
  bool have_table = false;
  if (!args.tables.empty()) {
    std::ifstream is(args.tables);
    if (!is) throw std::runtime_error("cannot open " + args.tables);
    table = gfra::ThresholdTable::load(is);
    have_table = true;
  }
  std::ofstream trace;
  if (!args.trace.empty()) {
    trace.open(args.trace);
    if (!trace) throw std::runtime_error("cannot open " + args.trace);
  }
  const auto results =
      gfra::run_experiment(args.cfg, have_table ? &table : nullptr,
                           args.trace.empty() ? nullptr : &trace, &std::cerr);
  print_results(results);
  write_results(results, args.cfg, false, args);
  return 0;
}

int cmd_genie(SweepArgs& args) {
  finalize_sweep(args);
  const auto results = gfra::genie_baseline(args.cfg, &std::cerr);
  print_results(results);
  write_results(results, args.cfg, true, args);
  return 0;
}

struct CalibrateArgs {
  int m = 5;
  int n_users = 5;
  double p = 0.2;
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30};
  long samples = 20000;
  double max_ratio = 0.5;
  std::uint64_t seed = 1;
  bool extend = false;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& args) {
  gfra::FrameConfig fc;
  fc.frame_length = args.m;
  fc.extend_with_standard_basis = args.extend;
  const auto books = gfra::build_codebooks(fc);

  gfra::ThresholdTable table;
  for (std::size_t i = 0; i < args.snr_db.size(); ++i) {
    gfra::RngStream rng(args.seed, (0xA1ull << 56) | i);
    const auto entry =
        gfra::calibrate_threshold(books, args.n_users, args.p, gfra::snr_db_to_linear(args.snr_db[i]),
                                  args.samples, args.max_ratio, rng);
    table.add(entry);
    std::printf("m=%d n=%d p=%g snr_db=%g: t_z=%.6g miss=%.4g false_alarm=%.4g%s\n", entry.m,
                entry.n_users, entry.p, entry.rho_db, entry.t_z, entry.miss, entry.false_alarm,
                entry.collision_reachable ? "" : " (collision unreachable)");
  }
  if (!args.out.empty()) {
    std::ofstream os(args.out);
    if (!os) throw std::runtime_error("cannot open " + args.out);
    table.save(os);
  }
  return 0;
}

struct VerifyArgs {
  int m = 5;
  int n_max = -1;
  std::string mode = "exhaustive";
  std::uint64_t pairs = 1000000;
  double min_gap = 1e-6;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  bool extend = false;
  std::string out;
  std::string export_codebook;
};

int cmd_verify(const VerifyArgs& args) {
  gfra::FrameConfig fc;
  fc.frame_length = args.m;
  fc.extend_with_standard_basis = args.extend;
  const auto books = gfra::build_codebooks(fc);

  const auto coh = gfra::verify_coherence(books, args.tol);
  std::printf("coherence m=%d: max_cross=%.12g target=%.12g violations=%zu\n", args.m,
              coh.max_cross, 1.0 / std::sqrt(static_cast<double>(args.m)),
              coh.violations.size());

  const int n_max = args.n_max < 0 ? args.m / 2 : args.n_max;
  const auto mode =
      args.mode == "sampled" ? gfra::PairScan::kSampled : gfra::PairScan::kExhaustive;
  const auto scan =
      gfra::verify_min_distance(fc, n_max, mode, args.min_gap, args.pairs, args.seed);
  for (const auto& e : scan.per_size)
    std::printf("n_active=%d pairs=%llu min_distance=%.9g violations=%llu\n", e.n_active,
                static_cast<unsigned long long>(e.pairs_checked), e.min_distance,
                static_cast<unsigned long long>(e.violations));

  if (!args.out.empty()) {
    std::ofstream os(args.out);
    if (!os) throw std::runtime_error("cannot open " + args.out);
    gfra::write_distance_scan_csv(scan, os);
  }
  if (!args.export_codebook.empty()) {
    std::ofstream os(args.export_codebook);
    if (!os) throw std::runtime_error("cannot open " + args.export_codebook);
    gfra::write_codebook_csv(books, os);
  }
  if (!coh.ok() || !scan.ok()) {
    std::fprintf(stderr, "verification FAILED\n");
    return 2;
  }
  std::printf("verification passed\n");
  return 0;
}

struct PlotArgs {
  std::string in;
  std::string out;
};

int cmd_plotdata(const PlotArgs& args) {
  std::ifstream is(args.in);
  if (!is) throw std::runtime_error("cannot open " + args.in);

  std::vector<std::string> meta;
  {
    std::ifstream header(args.in);
    std::string line;
    while (std::getline(header, line))
      if (!line.empty() && line[0] == '#') meta.push_back(line);
  }
  const auto results = gfra::parse_fer_csv(is);

  std::ofstream dat(args.out);
  if (!dat) throw std::runtime_error("cannot open " + args.out);
  for (const auto& line : meta) dat << line << "\n";
  dat << "# snr_db pc fer wilson_lo wilson_hi\n";
  std::vector<double> pcs;
  for (const auto& r : results)
    if (std::find(pcs.begin(), pcs.end(), r.pc) == pcs.end()) pcs.push_back(r.pc);
  bool first = true;
  for (double pc : pcs) {
    if (!first) dat << "\n";
    first = false;
    for (const auto& r : results) {
      if (r.pc != pc) continue;
      dat << gfra::fmt_g17(r.snr_db) << " " << gfra::fmt_g17(r.pc) << " " << gfra::fmt_g17(r.fer)
          << " " << gfra::fmt_g17(r.wilson_lo) << " " << gfra::fmt_g17(r.wilson_hi) << "\n";
    }
  }
  std::printf("wrote %s (%zu rows)\n", args.out.c_str(), results.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(gfra::kVersionString) +
               " - noncoherent random access over Gabor-frame codebooks"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.set_version_flag("--version", gfra::kVersionString);

  SweepArgs run_args;
  auto* run = app.add_subcommand("run", "Blind-receiver FER sweep");
  add_sweep_options(run, run_args, true);

  SweepArgs genie_args;
  auto* genie = app.add_subcommand("genie", "Genie-aided baseline sweep");
  add_sweep_options(genie, genie_args, false);

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "Calibrate collision thresholds");
  cal->add_option("--m", cal_args.m, "Frame length (prime >= 5)")->capture_default_str();
  cal->add_option("--n-users", cal_args.n_users, "Number of users")->capture_default_str();
  cal->add_option("--p", cal_args.p, "Per-user activation probability")->capture_default_str();
  cal->add_option("--snr-db", cal_args.snr_db, "SNR grid in dB")
      ->delimiter(',')
      ->capture_default_str();
  cal->add_option("--samples", cal_args.samples, "Monte Carlo samples per branch")
      ->capture_default_str();
  cal->add_option("--max-ratio", cal_args.max_ratio, "Miss/false-alarm ratio bound, in (0,1]")
      ->capture_default_str();
  cal->add_option("--seed", cal_args.seed, "Master seed")->capture_default_str();
  cal->add_flag("--extend", cal_args.extend, "Append the standard basis codebook");
  cal->add_option("--out", cal_args.out, "Write the threshold table CSV here");

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "Check coherence and pairwise subspace distances");
  ver->add_option("--m", ver_args.m, "Frame length (prime >= 5)")->capture_default_str();
  ver->add_option("--nmax", ver_args.n_max, "Largest size to scan (-1 = floor(m/2))")
      ->capture_default_str();
  ver->add_option("--mode", ver_args.mode, "exhaustive | sampled")
      ->check(CLI::IsMember({"exhaustive", "sampled"}))
      ->capture_default_str();
  ver->add_option("--pairs", ver_args.pairs, "Sampled pairs per size")->capture_default_str();
  ver->add_option("--min-gap", ver_args.min_gap, "Distance floor to enforce")
      ->capture_default_str();
  ver->add_option("--tol", ver_args.tol, "Coherence tolerance")->capture_default_str();
  ver->add_option("--seed", ver_args.seed, "Sampling seed")->capture_default_str();
  ver->add_flag("--extend", ver_args.extend, "Append the standard basis codebook");
  ver->add_option("--out", ver_args.out, "Write the distance scan CSV here");
  ver->add_option("--export-codebook", ver_args.export_codebook,
                  "Write every codeword to this CSV");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plotdata", "Convert a results CSV to gnuplot columns");
  plot->add_option("--in", plot_args.in, "Results CSV")->required();
  plot->add_option("--out", plot_args.out, "Output .dat path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (genie->parsed()) return cmd_genie(genie_args);
    if (cal->parsed()) return cmd_calibrate(cal_args);
    if (ver->parsed()) return cmd_verify(ver_args);
    if (plot->parsed()) return cmd_plotdata(plot_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
