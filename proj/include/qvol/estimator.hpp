#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qvol/exact_sum.hpp"
#include "qvol/lds.hpp"
#include "qvol/measures.hpp"
#include "qvol/sampling.hpp"
#include "qvol/separability.hpp"

namespace qvol {

enum class Region : std::uint8_t { Total, SepA, SepB, SepEither, SepBoth };

inline constexpr std::size_t kRegionCount = 5;
inline constexpr std::array<Region, kRegionCount> kAllRegions = {Region::Total, Region::SepA, Region::SepB,
                                                                 Region::SepEither, Region::SepBoth};

constexpr std::size_t region_index(Region r) { return static_cast<std::size_t>(r); }
/// "total", "sepA", "sepB", "sepEither", "sepBoth".
std::string_view to_string(Region region);
Region parse_region(std::string_view name);

/// Whether a sample with these flags belongs to `region`.
bool region_holds(Region region, const SeparabilityFlags& flags);

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public EstimatorError {
 public:
  using EstimatorError::EstimatorError;
};

struct Cell {
  std::uint64_t count = 0;
  ExactSum sum_w;
  ExactSum sum_w2;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Half-open index interval [begin, end).
struct IndexRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Convergence snapshot after `samples` draws: the running mean weight of
/// the leading metric in a bank, a scaled ratio in a report.
struct TracePoint {
  std::uint64_t samples = 0;
  double value = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Everything two banks must share to be mergeable.  The sequence dimension
/// is not stored; it follows from N and the manifold.
struct BankMetadata {
  int n_dim = 6;
  std::vector<Manifold> manifolds{Manifold::Volume};
  std::vector<MetricKind> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  SequenceSpec sequence;
  BoundaryPolicy policy;
  bool separability = true;

  /// Sorts and deduplicates the manifold and metric lists; validates N.
  BankMetadata normalized() const;
  /// Canonical JSON text (sorted keys, hex-encoded doubles).
  std::string canonical_json() const;
  /// 64-bit FNV-1a of canonical_json(), as 16 hex digits.
  std::string hash() const;

  friend bool operator==(const BankMetadata& a, const BankMetadata& b);
};

class AccumulatorBank {
 public:
  explicit AccumulatorBank(BankMetadata metadata);

  /// Adds w and w^2 to every (metric, region) cell whose region holds.
  /// Without separability, or when `flags` is empty, only total cells move.
  /// Throws EstimatorError on a manifold, metric-set or N mismatch, and on a
  /// repeated index.
  void accumulate(const StateSample& sample, std::optional<SeparabilityFlags> flags);

  /// In-place merge; throws EstimatorError on metadata mismatch or
  /// overlapping index ranges.
  void merge(const AccumulatorBank& other);

  /// Appends the current running mean of the leading metric to the trace.
  void record_trace(Manifold manifold);

  const BankMetadata& metadata() const { return metadata_; }
  bool has_manifold(Manifold manifold) const;
  const Cell& cell(Manifold manifold, MetricKind metric, Region region) const;
  std::uint64_t samples(Manifold manifold) const;
  const std::vector<IndexRange>& ranges(Manifold manifold) const;
  const std::vector<TracePoint>& trace(Manifold manifold) const;
  bool empty() const;

  friend bool operator==(const AccumulatorBank&, const AccumulatorBank&) = default;

 private:
  friend AccumulatorBank load_checkpoint(const std::filesystem::path& path);

  struct Part {
    std::uint64_t samples = 0;
    std::vector<IndexRange> ranges;  // sorted, disjoint, coalesced
    std::array<std::array<Cell, kRegionCount>, kMetricCount> cells{};
    std::vector<TracePoint> trace;

    friend bool operator==(const Part&, const Part&) = default;
  };

  Part& part(Manifold manifold);
  const Part& part(Manifold manifold) const;
  static void insert_range(std::vector<IndexRange>& ranges, IndexRange range);

  BankMetadata metadata_;
  std::bitset<kMetricCount> active_;
  std::array<Part, 2> parts_{};
};

AccumulatorBank merge(AccumulatorBank a, const AccumulatorBank& b);

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON; doubles are stored as hexadecimal floats so the
/// round trip is bit-exact.  Written to a temporary file and renamed.
void save_checkpoint(const AccumulatorBank& bank, const std::filesystem::path& path);
/// Throws CheckpointError on version mismatch, a stored hash that does not
/// match the stored metadata, or a malformed file.
AccumulatorBank load_checkpoint(const std::filesystem::path& path);

struct RegionStat {
  double estimate = 0.0;        ///< flag_constant * sum w / samples
  double standard_error = 0.0;  ///< NaN unless the stream is pseudo-random
  std::uint64_t pass_count = 0;
  double probability = 0.0;     ///< estimate / total estimate
  double bures_scaled = 0.0;    ///< estimate / Bures estimate of the same region
};

struct MetricRow {
  MetricKind metric = MetricKind::Bures;
  std::array<RegionStat, kRegionCount> regions{};
  double pooled = 0.0;  ///< mean of the sepA and sepB estimates
  double pooled_probability = 0.0;
  double pooled_bures_scaled = 0.0;
  double ratio_known = 0.0;      ///< total / closed-form Bures value
  double ratio_estimated = 0.0;  ///< total / Bures total estimate

  const RegionStat& operator[](Region r) const { return regions[region_index(r)]; }
};

struct ConjectureReport {
  double km_bures_ratio = 0.0;    ///< NaN when either metric is inactive
  double km_conjectured = 0.0;    ///< 2^(N(N-1)/2)
  double km_reference = 0.0;      ///< 31046.8 for the N=6 volume, NaN otherwise
  double sd_factor = 0.0;         ///< 4^(dim/2)
  double sd_bures = 0.0;          ///< sd_factor * Bures total estimate
  /// N=4 only (NaN otherwise): SD-rescaled separable Bures and Kubo-Mori
  /// estimates against silver_mean / 3 and 10 * silver_mean.
  double silver_sd_separable = 0.0;
  double silver_sd_target = 0.0;
  double silver_km_separable = 0.0;
  double silver_km_target = 0.0;
};

struct ManifoldReport {
  Manifold manifold = Manifold::Volume;
  int dimension = 0;  ///< real dimension of the manifold
  std::uint64_t samples = 0;
  double flag_constant = 0.0;
  double known_bures = 0.0;
  double known_bures_log = 0.0;
  std::vector<MetricRow> rows;
  /// Running ratio of the leading metric to its closed form (Bures) or to
  /// the final estimate (otherwise).
  std::vector<TracePoint> trace;
  double last_relative_change = 0.0;  ///< between the final two trace points; NaN if fewer
  std::array<double, kRegionCount> raw_pass_fraction{};
  ConjectureReport conjectures;

  const MetricRow* row(MetricKind metric) const;
};

struct VolumeReport {
  int n_dim = 0;
  std::string sequence;  ///< "gfaure", "halton" or "mc"
  std::uint64_t scramble_seed = 0;
  std::string boundary_policy;
  double epsilon = 0.0;
  bool separability = false;
  bool standard_errors = false;
  std::vector<ManifoldReport> manifolds;
  std::vector<std::string> warnings;

  const ManifoldReport* manifold(Manifold m) const;
};

/// Throws EstimatorError for an empty bank.
VolumeReport report(const AccumulatorBank& bank);

/// JSON form of a report (NaN written as null) and its inverse.
std::string report_to_json(const VolumeReport& report);
VolumeReport report_from_json(std::string_view text);

inline constexpr double kReferenceKmRatio = 31046.8;

}  // namespace qvol
