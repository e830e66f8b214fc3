#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace qvol {

enum class SequenceKind { GeneralizedFaure, Halton, PseudoRandom };

std::string_view to_string(SequenceKind kind);
SequenceKind parse_sequence_kind(std::string_view name);

/// Description of a deterministic point stream over the unit hypercube.
///
/// For generalized Faure sequences `base` is the field size; zero selects the
/// smallest prime >= dimension. `scramble_seed` fills the lower-triangular
/// scrambling matrices (0 keeps them at the identity, i.e. classical Faure)
/// and seeds the pseudo-random baseline.
struct SequenceSpec {
  SequenceKind kind = SequenceKind::GeneralizedFaure;
  int dimension = 1;
  std::uint32_t base = 0;
  std::uint64_t scramble_seed = 0;
  std::uint64_t start_index = 1;
};

struct CubePoint {
  std::vector<double> coordinates;
  std::uint64_t index = 0;
};

/// Emitted coordinates are clamped to [kCoordinateFloor, kCoordinateCeiling].
/// 1 - 2^-64 rounds to 1 in double precision, so the ceiling is the largest
/// double below 1.
inline constexpr double kCoordinateFloor = 0x1p-64;
inline constexpr double kCoordinateCeiling = 1.0 - 0x1p-53;

/// Largest index any stream will produce.
inline constexpr std::uint64_t kMaxSequenceIndex = (std::uint64_t{1} << 48) - 1;

bool is_prime(std::uint64_t value);
std::uint32_t smallest_prime_at_least(std::uint32_t value);
/// The first `count` primes, 2, 3, 5, ...
std::vector<std::uint32_t> first_primes(std::size_t count);

class PointGenerator;

/// Single-owner, resumable stream of points.  Parallel consumers partition the
/// index range and create one stream per partition with skip_to().
class PointStream {
 public:
  explicit PointStream(const SequenceSpec& spec);
  ~PointStream();
  PointStream(PointStream&&) noexcept;
  PointStream& operator=(PointStream&&) noexcept;
  PointStream(const PointStream&);
  PointStream& operator=(const PointStream&);

  CubePoint next_point();
  /// Writes the next point into `out` (size must equal the dimension) and
  /// returns the index that produced it.
  std::uint64_t next_point(std::span<double> out);
  /// Jumps to stream position `position` (0-based, counted from
  /// start_index); the next point is the one sequential generation would
  /// have produced after `position` draws.
  void skip_to(std::uint64_t position);

  std::uint64_t index() const { return index_; }
  int dimension() const { return spec_.dimension; }
  /// Resolved base for generalized Faure streams, 0 otherwise.
  std::uint32_t base() const;
  const SequenceSpec& spec() const { return spec_; }

 private:
  SequenceSpec spec_;
  std::uint64_t index_;
  std::unique_ptr<PointGenerator> generator_;
};

}  // namespace qvol
