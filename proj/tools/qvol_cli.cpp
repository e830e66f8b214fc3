// qvol: metric volumes and separability probabilities of N x N density
// matrices by (quasi-)Monte Carlo integration.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvol/calibration.hpp"
#include "qvol/runner.hpp"

namespace {

int print_calibration() {
  std::printf("%-3s %-10s %22s %22s %12s\n", "N", "manifold", "flag * integral", "closed form", "rel. error");
  try {
    for (const auto& e : qvol::calibrate_flag_constants()) {
      std::printf("%-3d %-10s %22.15e %22.15e %12.3e\n", e.n_dim, std::string(qvol::to_string(e.manifold)).c_str(),
                  e.flag * e.integral, e.analytic, e.relative_error);
    }
  } catch (const qvol::CalibrationError& e) {
    std::fprintf(stderr, "calibration failed: %s\n", e.what());
    return 3;
  }
  return 0;
}

int print_analytic() {
  std::printf("%-3s %-10s %5s %24s %22s\n", "N", "manifold", "dim", "Bures value", "log");
  for (int n = 2; n <= qvol::kMaxDim; ++n) {
    for (qvol::Manifold m : {qvol::Manifold::Volume, qvol::Manifold::Hyperarea}) {
      const auto v = qvol::analytic_bures_volume({n, m == qvol::Manifold::Volume ? 0 : 1, 2});
      std::printf("%-3d %-10s %5d %24.15e %22.15f\n", n, std::string(qvol::to_string(m)).c_str(),
                  qvol::manifold_dimension(n, m), v.value, v.log_value);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone-metric volumes, hyperareas and PPT separability probabilities"};
  app.require_subcommand(0, 1);

  qvol::RunConfig cfg;
  std::string mode = "volume";
  std::string seq = "gfaure";
  std::string policy = "auto";
  std::string format = "table";
  std::vector<std::string> metrics;
  std::string checkpoint;
  std::string out;
  bool no_separability = false;
  bool skip_calibration = false;
  bool quiet = false;

  app.add_option("--n", cfg.n_dim, "Matrix dimension N")->check(CLI::Range(2, qvol::kMaxDim))->capture_default_str();
  app.add_option("--mode", mode, "volume, hyperarea or both")
      ->check(CLI::IsMember({"volume", "hyperarea", "both"}))
      ->capture_default_str();
  app.add_option("--points", cfg.points, "Points per manifold")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seq", seq, "Point sequence")->check(CLI::IsMember({"gfaure", "halton", "mc"}))->capture_default_str();
  app.add_option("--seed", cfg.sequence.scramble_seed,
                 "Scrambling seed (gfaure; 0 = unscrambled) or stream seed (mc)")
      ->capture_default_str();
  app.add_option("--base", cfg.sequence.base, "Faure base; 0 picks the smallest prime >= dimension")
      ->capture_default_str();
  app.add_option("--start-index", cfg.sequence.start_index, "First sequence index")->capture_default_str();
  app.add_option("--metrics", metrics, "Comma-separated metric list (default: all six)")->delimiter(',');
  app.add_option("--boundary-policy", policy, "Zero-eigenvalue pair factor on the boundary")
      ->check(CLI::IsMember({"auto", "limit", "bures-pair", "epsilon"}))
      ->capture_default_str();
  app.add_option("--epsilon", cfg.policy.epsilon, "Regularizing eigenvalue for --boundary-policy epsilon")
      ->capture_default_str();
  app.add_option("--checkpoint", checkpoint, "Checkpoint file");
  app.add_option("--checkpoint-interval", cfg.checkpoint_interval, "Points between checkpoints")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--resume", cfg.resume, "Continue from --checkpoint");
  app.add_option("--out", out, "Write tables here instead of stdout");
  app.add_option("--format", format, "table, csv or json")->capture_default_str();
  app.add_option("--progress-interval", cfg.progress_interval, "Points between progress lines")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--no-separability", no_separability, "Skip the PPT classification");
  app.add_flag("--skip-calibration", skip_calibration, "Skip the small-N flag-constant check");
  app.add_flag("--quiet", quiet, "No progress output");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Check the flag constants against the closed forms");
  auto* analytic_cmd = app.add_subcommand("analytic", "Print closed-form Bures volumes and hyperareas");

  CLI11_PARSE(app, argc, argv);

  if (*calibrate_cmd) return print_calibration();
  if (*analytic_cmd) return print_analytic();

  try {
    cfg.mode = qvol::parse_run_mode(mode);
    cfg.sequence.kind = qvol::parse_sequence_kind(seq);
    cfg.policy.kind = qvol::parse_boundary_policy(policy);
    const qvol::OutputFormat fmt = qvol::parse_output_format(format);
    if (!metrics.empty()) {
      cfg.metrics.clear();
      for (const auto& m : metrics) cfg.metrics.push_back(qvol::parse_metric(m));
    }
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    cfg.separability = !no_separability;
    cfg.calibrate = !skip_calibration;
    if (!quiet) cfg.progress = &std::cerr;

    const qvol::VolumeReport report = qvol::run(cfg);
    if (out.empty()) {
      std::cout << qvol::emit_tables(report, fmt);
    } else {
      qvol::write_tables(report, fmt, out);
    }
  } catch (const qvol::CalibrationError& e) {
    std::cerr << "calibration failed, refusing to sample: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
