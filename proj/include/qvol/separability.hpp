#pragma once

#include <optional>

#include "qvol/linalg.hpp"

namespace qvol {

/// Eigensolver-noise guard for the PPT test.
inline constexpr double kPptTolerance = 1e-12;

/// Split A transposes the four 3x3 blocks of a 6x6 matrix, split B the nine
/// 2x2 blocks.
inline constexpr TensorSplit kSplitA{2, 3};
inline constexpr TensorSplit kSplitB{3, 2};

struct SeparabilityFlags {
  bool pass_a = false;
  bool pass_b = false;

  bool either() const { return pass_a || pass_b; }
  bool both() const { return pass_a && pass_b; }
  friend bool operator==(const SeparabilityFlags&, const SeparabilityFlags&) = default;
};

/// Peres-Horodecki test: min eigenvalue of the partial transpose >= -tolerance.
bool ppt_pass(const ComplexMatrix& rho, TensorSplit split, double tolerance = kPptTolerance);

/// The two inequivalent splits for dimension N: (p, N/p) and (N/p, p) with p
/// the smallest prime factor.  Empty for prime N, where nothing is tested.
std::optional<std::pair<TensorSplit, TensorSplit>> splits_for_dimension(int n_dim);

class SeparabilityClassifier {
 public:
  SeparabilityClassifier(TensorSplit split_a, TensorSplit split_b, double tolerance = kPptTolerance);
  /// Splits for N; throws std::invalid_argument for prime N.
  static SeparabilityClassifier for_dimension(int n_dim);

  /// One eigenvalue computation per split.
  SeparabilityFlags classify(const ComplexMatrix& rho) const;

  TensorSplit split_a() const { return split_a_; }
  TensorSplit split_b() const { return split_b_; }

 private:
  TensorSplit split_a_;
  TensorSplit split_b_;
  double tolerance_;
};

/// Qubit-qutrit classification with kSplitA / kSplitB.
SeparabilityFlags classify(const ComplexMatrix& rho);

}  // namespace qvol
