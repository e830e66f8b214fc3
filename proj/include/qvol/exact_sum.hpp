#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace qvol {

/// Exact running sum of doubles in fixed point (32-bit limbs spanning the
/// whole double exponent range).  Addition is associative and commutative,
/// so sums are independent of accumulation and merge order.
class ExactSum {
 public:
  void add(double x);
  void merge(const ExactSum& other);

  /// The sum rounded to double; a pure function of the exact value.
  double value() const;
  bool is_zero() const;

  /// Non-overlapping doubles whose exact sum is this value (most significant
  /// first).  Empty for zero.
  std::vector<double> expansion() const;
  static ExactSum from_expansion(const std::vector<double>& parts);

  friend bool operator==(const ExactSum& a, const ExactSum& b);
  friend ExactSum operator-(ExactSum a, const ExactSum& b);
  friend ExactSum operator+(ExactSum a, const ExactSum& b) {
    a.merge(b);
    return a;
  }

 private:
  static constexpr int kMinExponent = -1088;  // limb 0 weight 2^kMinExponent
  static constexpr int kLimbs = 70;

  void normalize() const;

  mutable std::array<std::int64_t, kLimbs> limbs_{};
  mutable std::uint32_t pending_ = 0;  // additions since the last normalize
};

}  // namespace qvol
