#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qvol/estimator.hpp"

namespace qvol {

enum class RunMode : std::uint8_t { Volume, Hyperarea, Both };
enum class OutputFormat : std::uint8_t { Table, Csv, Json };

std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view name);
std::string_view to_string(OutputFormat format);
/// Throws std::invalid_argument for anything but table, csv or json.
OutputFormat parse_output_format(std::string_view name);

std::vector<Manifold> manifolds_for(RunMode mode);

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int n_dim = 6;
  RunMode mode = RunMode::Volume;
  /// kind, base, scramble_seed and start_index are used; the dimension is
  /// set per manifold.
  SequenceSpec sequence;
  std::uint64_t points = 1'000'000;  ///< per manifold
  int workers = 1;
  std::vector<MetricKind> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  BoundaryPolicy policy;
  /// PPT classification with both splits; ignored for prime N.
  bool separability = true;

  std::optional<std::filesystem::path> checkpoint;
  std::uint64_t checkpoint_interval = 1'000'000;
  bool resume = false;

  OutputFormat format = OutputFormat::Table;
  std::optional<std::filesystem::path> output;

  /// Small-N flag-constant calibration before sampling.
  bool calibrate = true;
  /// Test hook: scales the flag constants seen by the calibration check.
  double flag_constant_scale = 1.0;

  /// Progress lines and convergence-trace points fall on multiples of this
  /// many samples.
  std::uint64_t progress_interval = 1'000'000;
  std::ostream* progress = nullptr;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  BankMetadata metadata() const;
  /// Hash of everything that affects the accumulated sums (not the point
  /// count, worker count, output or checkpoint settings).
  std::string hash() const { return metadata().hash(); }
};

/// Calibrates, samples every manifold of the mode across `workers` threads,
/// checkpoints, and reports.  Writes the tables to config.output when set.
/// Throws CalibrationError before sampling if calibration fails, and
/// RunError on checkpoint conflicts.
VolumeReport run(const RunConfig& config);

/// Names of the table blocks `report` produces, in order.
std::vector<std::string> table_blocks(const VolumeReport& report);

std::string emit_tables(const VolumeReport& report, OutputFormat format);
void write_tables(const VolumeReport& report, OutputFormat format, const std::filesystem::path& path);

}  // namespace qvol
