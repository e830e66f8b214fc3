#include "qvol/separability.hpp"

#include <stdexcept>

namespace qvol {

bool ppt_pass(const ComplexMatrix& rho, TensorSplit split, double tolerance) {
  return min_eigenvalue(partial_transpose(rho, split)) >= -tolerance;
}

std::optional<std::pair<TensorSplit, TensorSplit>> splits_for_dimension(int n_dim) {
  for (int p = 2; p * p <= n_dim; ++p) {
    if (n_dim % p == 0) return std::make_pair(TensorSplit{p, n_dim / p}, TensorSplit{n_dim / p, p});
  }
  return std::nullopt;
}

SeparabilityClassifier::SeparabilityClassifier(TensorSplit split_a, TensorSplit split_b, double tolerance)
    : split_a_(split_a), split_b_(split_b), tolerance_(tolerance) {
  if (split_a.dim() != split_b.dim()) throw std::invalid_argument("splits must act on the same dimension");
}

SeparabilityClassifier SeparabilityClassifier::for_dimension(int n_dim) {
  const auto splits = splits_for_dimension(n_dim);
  if (!splits) throw std::invalid_argument("no bipartition for prime dimension " + std::to_string(n_dim));
  return SeparabilityClassifier(splits->first, splits->second);
}

SeparabilityFlags SeparabilityClassifier::classify(const ComplexMatrix& rho) const {
  return {ppt_pass(rho, split_a_, tolerance_), ppt_pass(rho, split_b_, tolerance_)};
}

SeparabilityFlags classify(const ComplexMatrix& rho) {
  return SeparabilityClassifier(kSplitA, kSplitB).classify(rho);
}

}  // namespace qvol
