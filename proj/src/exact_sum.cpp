#include "qvol/exact_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace qvol {

namespace {
constexpr std::int64_t kLimbMask = 0xffffffffLL;
}

void ExactSum::add(double x) {
  if (x == 0.0) return;
  if (!std::isfinite(x)) throw std::domain_error("ExactSum accepts finite values only");
  int exponent = 0;
  const double mantissa = std::frexp(std::abs(x), &exponent);
  // |x| = m * 2^(exponent - 53) with m a 53-bit integer.
  const auto m = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  const int position = exponent - 53 - kMinExponent;
  const int limb = position >> 5;
  const int shift = position & 31;
  const unsigned __int128 wide = static_cast<unsigned __int128>(m) << shift;
  const auto p0 = static_cast<std::int64_t>(wide & kLimbMask);
  const auto p1 = static_cast<std::int64_t>((wide >> 32) & kLimbMask);
  const auto p2 = static_cast<std::int64_t>(wide >> 64);
  if (x > 0.0) {
    limbs_[limb] += p0;
    limbs_[limb + 1] += p1;
    limbs_[limb + 2] += p2;
  } else {
    limbs_[limb] -= p0;
    limbs_[limb + 1] -= p1;
    limbs_[limb + 2] -= p2;
  }
  if (++pending_ >= (1u << 30)) normalize();
}

void ExactSum::normalize() const {
  for (int i = 0; i + 1 < kLimbs; ++i) {
    const std::int64_t carry = limbs_[i] >> 32;  // arithmetic shift: floor division
    limbs_[i] -= carry * (kLimbMask + 1);
    limbs_[i + 1] += carry;
  }
  pending_ = 0;
}

void ExactSum::merge(const ExactSum& other) {
  normalize();
  other.normalize();
  for (int i = 0; i < kLimbs; ++i) limbs_[i] += other.limbs_[i];
  normalize();
}

bool ExactSum::is_zero() const {
  normalize();
  for (std::int64_t limb : limbs_)
    if (limb != 0) return false;
  return true;
}

double ExactSum::value() const {
  normalize();
  int top = kLimbs - 1;
  while (top >= 0 && limbs_[top] == 0) --top;
  if (top < 0) return 0.0;
  if (limbs_[top] < 0) {
    // Negative values carry a -1 far above their magnitude; round |x| instead.
    ExactSum negated;
    for (int i = 0; i < kLimbs; ++i) negated.limbs_[i] = -limbs_[i];
    return -negated.value();
  }
  // Five limbs below the leading one cover more than 64 bits of precision.
  long double acc = 0.0L;
  for (int i = top; i >= 0 && i >= top - 5; --i) {
    acc += std::ldexp(static_cast<long double>(limbs_[i]), 32 * i + kMinExponent);
  }
  return static_cast<double>(acc);
}

std::vector<double> ExactSum::expansion() const {
  std::vector<double> parts;
  ExactSum rest = *this;
  for (int guard = 0; guard < 4 * kLimbs && !rest.is_zero(); ++guard) {
    const double head = rest.value();
    if (head == 0.0) break;  // remainder below the double range; never produced by add()
    parts.push_back(head);
    rest.add(-head);
  }
  return parts;
}

ExactSum ExactSum::from_expansion(const std::vector<double>& parts) {
  ExactSum s;
  for (double p : parts) s.add(p);
  return s;
}

bool operator==(const ExactSum& a, const ExactSum& b) {
  a.normalize();
  b.normalize();
  return a.limbs_ == b.limbs_;
}

ExactSum operator-(ExactSum a, const ExactSum& b) {
  a.normalize();
  b.normalize();
  for (int i = 0; i < ExactSum::kLimbs; ++i) a.limbs_[i] -= b.limbs_[i];
  a.normalize();
  return a;
}

}  // namespace qvol
