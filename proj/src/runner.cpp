#include "qvol/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "qvol/calibration.hpp"
#include "qvol/separability.hpp"

namespace qvol {

namespace {

constexpr std::array<std::string_view, 3> kModeNames = {"volume", "hyperarea", "both"};
constexpr std::array<std::string_view, 3> kFormatNames = {"table", "csv", "json"};

SequenceSpec stream_spec(const RunConfig& cfg, Manifold manifold) {
  SequenceSpec spec = cfg.sequence;
  spec.dimension = cube_dimension(cfg.n_dim, manifold);
  return spec;
}

// Draws stream positions [begin, end) for one manifold into `out`, split
// across worker threads.  Sums are exact, so the split does not affect the
// result.
void sample_positions(const RunConfig& cfg, const BankMetadata& meta, Manifold manifold, std::uint64_t begin,
                      std::uint64_t end, AccumulatorBank& out) {
  const std::uint64_t total = end - begin;
  const auto workers = static_cast<std::uint64_t>(std::max(1, cfg.workers));
  const std::uint64_t used = std::min<std::uint64_t>(workers, std::max<std::uint64_t>(total, 1));
  std::vector<AccumulatorBank> banks(used, AccumulatorBank(meta));
  std::vector<std::exception_ptr> errors(used);

  auto work = [&](std::uint64_t w) {
    try {
      const std::uint64_t lo = begin + total * w / used;
      const std::uint64_t hi = begin + total * (w + 1) / used;
      const StateSampler sampler(meta.n_dim, manifold, meta.metrics, meta.policy);
      PointStream stream(stream_spec(cfg, manifold));
      stream.skip_to(lo);
      std::optional<SeparabilityClassifier> classifier;
      if (meta.separability) classifier = SeparabilityClassifier::for_dimension(meta.n_dim);
      std::vector<double> u(static_cast<std::size_t>(sampler.cube_dimension()));
      StateSample sample;
      for (std::uint64_t p = lo; p < hi; ++p) {
        const std::uint64_t index = stream.next_point(u);
        sampler.sample(u, index, sample);
        std::optional<SeparabilityFlags> flags;
        if (classifier) flags = classifier->classify(sample.rho);
        banks[w].accumulate(sample, flags);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (used == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::uint64_t w = 0; w < used; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& b : banks) out.merge(b);
}

AccumulatorBank open_bank(const RunConfig& cfg, const BankMetadata& meta) {
  if (!cfg.checkpoint) {
    if (cfg.resume) throw std::invalid_argument("resume requires a checkpoint path");
    return AccumulatorBank(meta);
  }
  const auto& path = *cfg.checkpoint;
  const bool exists = std::filesystem::exists(path);
  if (!cfg.resume) {
    if (exists) throw RunError("checkpoint " + path.string() + " already exists; resume it or remove it");
    return AccumulatorBank(meta);
  }
  if (!exists) throw RunError("no checkpoint at " + path.string() + " to resume from");
  AccumulatorBank bank = load_checkpoint(path);
  if (bank.metadata().hash() != meta.hash()) {
    throw RunError("checkpoint " + path.string() + " was written for a different configuration (hash " +
                   bank.metadata().hash() + ", expected " + meta.hash() + ")");
  }
  for (Manifold m : meta.manifolds) {
    const std::uint64_t done = bank.samples(m);
    if (done > cfg.points) throw RunError("checkpoint holds more points than requested");
    const auto& ranges = bank.ranges(m);
    const std::uint64_t first = cfg.sequence.start_index;
    const bool prefix = done == 0 ? ranges.empty()
                                  : ranges.size() == 1 && ranges[0].begin == first && ranges[0].end == first + done;
    if (!prefix) throw RunError("checkpoint does not cover a prefix of the sequence");
  }
  return bank;
}

void print_progress(const RunConfig& cfg, const AccumulatorBank& bank, Manifold m, double seconds) {
  if (!cfg.progress) return;
  const std::uint64_t n = bank.samples(m);
  const MetricKind lead = bank.metadata().metrics.front();
  const double mean = bank.cell(m, lead, Region::Total).sum_w.value() / static_cast<double>(n);
  char line[256];
  if (lead == MetricKind::Bures) {
    const double ratio = flag_constant(cfg.n_dim, m) * mean / known_bures_value(cfg.n_dim, m);
    std::snprintf(line, sizeof line, "%s: %llu/%llu points  Bures/known %.6f  %.1f s", std::string(to_string(m)).c_str(),
                  static_cast<unsigned long long>(n), static_cast<unsigned long long>(cfg.points), ratio, seconds);
  } else {
    std::snprintf(line, sizeof line, "%s: %llu/%llu points  %s mean weight %.6g  %.1f s",
                  std::string(to_string(m)).c_str(), static_cast<unsigned long long>(n),
                  static_cast<unsigned long long>(cfg.points), std::string(to_string(lead)).c_str(), mean, seconds);
  }
  *cfg.progress << line << std::endl;
}

std::string fmt(double x, const char* spec = "%.6g") {
  if (std::isnan(x)) return "-";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, spec, x);
  return buffer;
}

double block_value(const MetricRow& row, std::string_view block) {
  if (block == "total-known") return row.ratio_known;
  if (block == "total-estimated") return row.ratio_estimated;
  if (block == "pooled") return row.pooled_bures_scaled;
  return row[parse_region(block)].bures_scaled;
}

double block_probability(const MetricRow& row, std::string_view block) {
  if (block == "pooled") return row.pooled_probability;
  return row[parse_region(block)].probability;
}

std::string block_title(std::string_view block, int n_dim) {
  if (block == "total-known") return "Total, scaled by the closed-form Bures value";
  if (block == "total-estimated") return "Total, scaled by the estimated Bures value";
  if (block == "sepA" || block == "sepB") {
    const auto splits = splits_for_dimension(n_dim);
    const TensorSplit s = block == "sepA" ? splits->first : splits->second;
    return "PPT under split " + std::string(block == "sepA" ? "A" : "B") + " (" + std::to_string(s.dim_a) +
           " x " + std::to_string(s.dim_b) + "), scaled by the Bures value of the region";
  }
  if (block == "sepEither") return "PPT under either split, scaled by the Bures value of the region";
  if (block == "sepBoth") return "PPT under both splits, scaled by the Bures value of the region";
  return "Pooled (mean of split A and split B), scaled by the pooled Bures value";
}

std::string emit_table(const VolumeReport& rep) {
  std::ostringstream out;
  out << "N=" << rep.n_dim << "  sequence=" << rep.sequence << "  seed=" << rep.scramble_seed
      << "  boundary-policy=" << rep.boundary_policy;
  if (rep.boundary_policy == "epsilon") out << " (epsilon " << fmt(rep.epsilon) << ")";
  out << "\nsamples:";
  for (const auto& mr : rep.manifolds) out << "  " << to_string(mr.manifold) << " " << mr.samples;
  out << "\n";

  const auto& first = rep.manifolds.front();
  char line[512];
  int number = 0;
  for (const std::string& block : table_blocks(rep)) {
    const bool separable = block != "total-known" && block != "total-estimated";
    out << "\n[" << ++number << "] " << block_title(block, rep.n_dim) << "\n";
    std::snprintf(line, sizeof line, "%-8s", "metric");
    out << line;
    for (const auto& mr : rep.manifolds) {
      std::snprintf(line, sizeof line, " %16s", std::string(to_string(mr.manifold)).c_str());
      out << line;
      if (separable) {
        std::snprintf(line, sizeof line, " %12s", "probability");
        out << line;
      }
    }
    out << "\n";
    for (std::size_t r = 0; r < first.rows.size(); ++r) {
      std::snprintf(line, sizeof line, "%-8s", std::string(table_label(first.rows[r].metric)).c_str());
      out << line;
      for (const auto& mr : rep.manifolds) {
        std::snprintf(line, sizeof line, " %16s", fmt(block_value(mr.rows[r], block)).c_str());
        out << line;
        if (separable) {
          std::snprintf(line, sizeof line, " %12s", fmt(block_probability(mr.rows[r], block), "%.4g").c_str());
          out << line;
        }
      }
      out << "\n";
    }
    if (separable) {
      out << "Bures scaling factor:";
      for (const auto& mr : rep.manifolds) {
        const MetricRow* b = mr.row(MetricKind::Bures);
        const double factor = !b ? NAN : block == "pooled" ? b->pooled : (*b)[parse_region(block)].estimate;
        out << "  " << to_string(mr.manifold) << " " << fmt(factor);
      }
      out << "\n";
    }
  }

  out << "\nAnalytic comparison\n";
  std::snprintf(line, sizeof line, "%-10s %5s %14s %14s %10s %14s\n", "manifold", "dim", "closed form", "estimate",
                "ratio", "flag constant");
  out << line;
  for (const auto& mr : rep.manifolds) {
    const MetricRow* b = mr.row(MetricKind::Bures);
    std::snprintf(line, sizeof line, "%-10s %5d %14s %14s %10s %14s\n", std::string(to_string(mr.manifold)).c_str(),
                  mr.dimension, fmt(mr.known_bures, "%.8g").c_str(),
                  fmt(b ? (*b)[Region::Total].estimate : NAN, "%.8g").c_str(),
                  fmt(b ? b->ratio_known : NAN, "%.6f").c_str(), fmt(mr.flag_constant, "%.8g").c_str());
    out << line;
  }

  out << "\nConjectures\n";
  for (const auto& mr : rep.manifolds) {
    const auto& cj = mr.conjectures;
    out << to_string(mr.manifold) << ": KM/Bures " << fmt(cj.km_bures_ratio);
    if (!std::isnan(cj.km_conjectured)) out << "  (2^(N(N-1)/2) = " << fmt(cj.km_conjectured) << ")";
    if (!std::isnan(cj.km_reference)) out << "  reference estimate " << fmt(cj.km_reference);
    out << "\n  SD-metric Bures value " << fmt(cj.sd_bures) << "  (factor 4^(dim/2) = " << fmt(cj.sd_factor) << ")\n";
    if (!std::isnan(cj.silver_sd_target)) {
      out << "  SD separable volume " << fmt(cj.silver_sd_separable) << " vs silver mean / 3 = "
          << fmt(cj.silver_sd_target) << "\n  SD-scaled KM separable volume " << fmt(cj.silver_km_separable)
          << " vs 10 * silver mean = " << fmt(cj.silver_km_target) << "\n";
    }
  }

  if (rep.separability) {
    out << "\nRaw PPT pass fractions\n";
    for (const auto& mr : rep.manifolds) {
      out << to_string(mr.manifold) << ":";
      for (Region r : kAllRegions) {
        if (r == Region::Total) continue;
        out << "  " << to_string(r) << " " << fmt(mr.raw_pass_fraction[region_index(r)], "%.5f");
      }
      out << "\n";
    }
  }

  if (rep.standard_errors) {
    out << "\nStandard errors of the total estimates (pseudo-random stream)\n";
    for (const auto& mr : rep.manifolds) {
      for (const auto& row : mr.rows) {
        std::snprintf(line, sizeof line, "%-10s %-8s %14s +- %s\n", std::string(to_string(mr.manifold)).c_str(),
                      std::string(table_label(row.metric)).c_str(), fmt(row[Region::Total].estimate, "%.8g").c_str(),
                      fmt(row[Region::Total].standard_error, "%.3g").c_str());
        out << line;
      }
    }
  } else {
    out << "\nConvergence (low-discrepancy stream; no standard errors)\n";
    for (const auto& mr : rep.manifolds) {
      out << to_string(mr.manifold) << ": relative change over the last interval "
          << fmt(mr.last_relative_change, "%.3g") << "\n";
      for (const auto& t : mr.trace) out << "  " << t.samples << "  " << fmt(t.value, "%.6f") << "\n";
    }
  }

  for (const auto& w : rep.warnings) out << "\nwarning: " << w;
  if (!rep.warnings.empty()) out << "\n";
  return out.str();
}

std::string emit_csv(const VolumeReport& rep) {
  const auto blocks = table_blocks(rep);
  std::ostringstream out;
  out << "row";
  for (const auto& b : blocks) out << "," << b;
  out << "\n";
  for (const auto& mr : rep.manifolds) {
    for (const auto& row : mr.rows) {
      out << to_string(mr.manifold) << "/" << to_string(row.metric);
      for (const auto& b : blocks) out << "," << fmt(block_value(row, b), "%.17g");
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::string_view to_string(RunMode mode) { return kModeNames[static_cast<std::size_t>(mode)]; }

RunMode parse_run_mode(std::string_view name) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i)
    if (kModeNames[i] == name) return static_cast<RunMode>(i);
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) { return kFormatNames[static_cast<std::size_t>(format)]; }

OutputFormat parse_output_format(std::string_view name) {
  for (std::size_t i = 0; i < kFormatNames.size(); ++i)
    if (kFormatNames[i] == name) return static_cast<OutputFormat>(i);
  throw std::invalid_argument("unsupported output format '" + std::string(name) + "'");
}

std::vector<Manifold> manifolds_for(RunMode mode) {
  switch (mode) {
    case RunMode::Volume: return {Manifold::Volume};
    case RunMode::Hyperarea: return {Manifold::Hyperarea};
    case RunMode::Both: return {Manifold::Volume, Manifold::Hyperarea};
  }
  return {};
}

void RunConfig::validate() const {
  if (n_dim < 2 || n_dim > kMaxDim) throw std::invalid_argument("N must lie in [2, 6]");
  if (points == 0) throw std::invalid_argument("points must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (metrics.empty()) throw std::invalid_argument("at least one metric is required");
  if (checkpoint_interval == 0 || progress_interval == 0) throw std::invalid_argument("intervals must be positive");
  if (policy.kind == BoundaryPolicyKind::Epsilon && !(policy.epsilon > 0.0 && policy.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (sequence.start_index + points - 1 > kMaxSequenceIndex) throw std::invalid_argument("too many points");
}

BankMetadata RunConfig::metadata() const {
  BankMetadata m;
  m.n_dim = n_dim;
  m.manifolds = manifolds_for(mode);
  m.metrics = metrics;
  m.sequence = sequence;
  m.policy = policy;
  m.separability = separability && splits_for_dimension(n_dim).has_value();
  return m.normalized();
}

VolumeReport run(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.calibrate) calibrate_flag_constants(cfg.flag_constant_scale);

  const BankMetadata meta = cfg.metadata();
  AccumulatorBank bank = open_bank(cfg, meta);
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  for (Manifold m : meta.manifolds) {
    std::uint64_t done = bank.samples(m);
    while (done < cfg.points) {
      // Segments end on multiples of the progress interval, so trace points
      // and checkpoints do not depend on where a run was resumed.
      const std::uint64_t next = std::min(cfg.points, (done / cfg.progress_interval + 1) * cfg.progress_interval);
      sample_positions(cfg, meta, m, done, next, bank);
      const std::uint64_t before = done;
      done = next;
      if (done % cfg.progress_interval == 0) {
        bank.record_trace(m);
        print_progress(cfg, bank, m, elapsed());
      }
      if (cfg.checkpoint && done / cfg.checkpoint_interval > before / cfg.checkpoint_interval) {
        save_checkpoint(bank, *cfg.checkpoint);
      }
    }
  }
  if (cfg.checkpoint) save_checkpoint(bank, *cfg.checkpoint);

  VolumeReport rep = report(bank);
  if (cfg.output) write_tables(rep, cfg.format, *cfg.output);
  return rep;
}

std::vector<std::string> table_blocks(const VolumeReport& report) {
  std::vector<std::string> blocks{"total-known", "total-estimated"};
  if (report.separability) {
    for (Region r : {Region::SepA, Region::SepB, Region::SepEither, Region::SepBoth}) {
      blocks.emplace_back(to_string(r));
    }
    blocks.emplace_back("pooled");
  }
  return blocks;
}

std::string emit_tables(const VolumeReport& report, OutputFormat format) {
  if (report.manifolds.empty()) throw std::invalid_argument("report has no manifolds");
  switch (format) {
    case OutputFormat::Table: return emit_table(report);
    case OutputFormat::Csv: return emit_csv(report);
    case OutputFormat::Json: return report_to_json(report) + "\n";
  }
  throw std::invalid_argument("unsupported output format");
}

void write_tables(const VolumeReport& report, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RunError("cannot write " + path.string());
  out << emit_tables(report, format);
  if (!out) throw RunError("failed writing " + path.string());
}

}  // namespace qvol
