#include "qvol/lds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qvol {

std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::GeneralizedFaure: return "gfaure";
    case SequenceKind::Halton: return "halton";
    case SequenceKind::PseudoRandom: return "mc";
  }
  return "unknown";
}

SequenceKind parse_sequence_kind(std::string_view name) {
  if (name == "gfaure" || name == "generalized-faure") return SequenceKind::GeneralizedFaure;
  if (name == "halton") return SequenceKind::Halton;
  if (name == "mc" || name == "pseudo-random") return SequenceKind::PseudoRandom;
  throw std::invalid_argument("unknown sequence kind: " + std::string(name));
}

bool is_prime(std::uint64_t value) {
  if (value < 2) return false;
  for (std::uint64_t d = 2; d * d <= value; ++d) {
    if (value % d == 0) return false;
  }
  return true;
}

std::uint32_t smallest_prime_at_least(std::uint32_t value) {
  std::uint32_t p = std::max<std::uint32_t>(value, 2);
  while (!is_prime(p)) ++p;
  return p;
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  for (std::uint32_t p = 2; primes.size() < count; ++p) {
    if (is_prime(p)) primes.push_back(p);
  }
  return primes;
}

namespace {

double clamp_coordinate(double x) {
  return std::clamp(x, kCoordinateFloor, kCoordinateCeiling);
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

class PointGenerator {
 public:
  virtual ~PointGenerator() = default;
  virtual void generate(std::uint64_t index, std::span<double> out) const = 0;
  virtual std::unique_ptr<PointGenerator> clone() const = 0;
  virtual std::uint32_t base() const { return 0; }
};

namespace {

// Dimension j (1-based) uses generator matrix A_j * P^(j-1) over GF(b), with P
// the upper-triangular Pascal matrix.  Rows are output digits, columns are
// index digits.
class GeneralizedFaure final : public PointGenerator {
 public:
  GeneralizedFaure(int dimension, std::uint32_t base, std::uint64_t scramble_seed)
      : dimension_(dimension), base_(base) {
    const double bits_per_digit = std::log2(static_cast<double>(base));
    index_digits_ = static_cast<int>(std::ceil(48.0 / bits_per_digit));
    while (std::pow(static_cast<double>(base), index_digits_) < 0x1p48) ++index_digits_;
    output_digits_ = std::min(32, static_cast<int>(std::ceil(53.0 / bits_per_digit)));

    const std::uint64_t b = base;
    // binom[k][m] = C(k, m) mod b
    const int width = std::max(index_digits_, output_digits_);
    std::vector<std::vector<std::uint64_t>> binom(width, std::vector<std::uint64_t>(width, 0));
    for (int k = 0; k < width; ++k) {
      binom[k][0] = 1;
      for (int m = 1; m <= k; ++m) binom[k][m] = (binom[k - 1][m - 1] + (m < k ? binom[k - 1][m] : 0)) % b;
    }

    std::uint64_t rng_state = scramble_seed;
    auto draw = [&](std::uint64_t range) {
      rng_state += 0x9e3779b97f4a7c15ULL;
      return splitmix64(rng_state) % range;
    };

    matrices_.assign(static_cast<std::size_t>(dimension) * output_digits_ * index_digits_, 0);
    std::vector<std::uint64_t> pascal(static_cast<std::size_t>(output_digits_) * index_digits_);
    std::vector<std::uint64_t> scramble(static_cast<std::size_t>(output_digits_) * output_digits_);
    for (int j = 0; j < dimension; ++j) {
      const std::uint64_t s = static_cast<std::uint64_t>(j) % b;
      for (int m = 0; m < output_digits_; ++m) {
        for (int k = 0; k < index_digits_; ++k) {
          std::uint64_t v = 0;
          if (k >= m) {
            std::uint64_t power = 1;
            for (int e = 0; e < k - m; ++e) power = power * s % b;
            v = binom[k][m] * power % b;
          }
          pascal[m * index_digits_ + k] = v;
        }
      }
      std::fill(scramble.begin(), scramble.end(), 0);
      for (int r = 0; r < output_digits_; ++r) {
        if (scramble_seed == 0) {
          scramble[r * output_digits_ + r] = 1;
          continue;
        }
        for (int m = 0; m < r; ++m) scramble[r * output_digits_ + m] = draw(b);
        scramble[r * output_digits_ + r] = 1 + draw(b - 1);
      }
      std::uint64_t* c = &matrices_[static_cast<std::size_t>(j) * output_digits_ * index_digits_];
      for (int r = 0; r < output_digits_; ++r) {
        for (int k = 0; k < index_digits_; ++k) {
          std::uint64_t acc = 0;
          for (int m = 0; m <= r; ++m) acc += scramble[r * output_digits_ + m] * pascal[m * index_digits_ + k];
          c[r * index_digits_ + k] = acc % b;
        }
      }
    }
  }

  void generate(std::uint64_t index, std::span<double> out) const override {
    std::uint64_t digits[64];
    for (int k = 0; k < index_digits_; ++k) {
      digits[k] = index % base_;
      index /= base_;
    }
    const double inv_base = 1.0 / static_cast<double>(base_);
    for (int j = 0; j < dimension_; ++j) {
      const std::uint64_t* c = &matrices_[static_cast<std::size_t>(j) * output_digits_ * index_digits_];
      double value = 0.0;
      for (int r = output_digits_ - 1; r >= 0; --r) {
        std::uint64_t acc = 0;
        const std::uint64_t* row = c + r * index_digits_;
        for (int k = 0; k < index_digits_; ++k) acc += row[k] * digits[k];
        value = (value + static_cast<double>(acc % base_)) * inv_base;
      }
      out[j] = clamp_coordinate(value);
    }
  }

  std::unique_ptr<PointGenerator> clone() const override {
    return std::make_unique<GeneralizedFaure>(*this);
  }

  std::uint32_t base() const override { return base_; }

 private:
  int dimension_;
  std::uint32_t base_;
  int index_digits_ = 0;
  int output_digits_ = 0;
  std::vector<std::uint64_t> matrices_;
};

class Halton final : public PointGenerator {
 public:
  explicit Halton(int dimension) : primes_(first_primes(static_cast<std::size_t>(dimension))) {}

  void generate(std::uint64_t index, std::span<double> out) const override {
    for (std::size_t j = 0; j < primes_.size(); ++j) {
      const std::uint64_t b = primes_[j];
      const double inv_base = 1.0 / static_cast<double>(b);
      double factor = inv_base;
      double value = 0.0;
      for (std::uint64_t n = index; n > 0; n /= b) {
        value += static_cast<double>(n % b) * factor;
        factor *= inv_base;
      }
      out[j] = clamp_coordinate(value);
    }
  }

  std::unique_ptr<PointGenerator> clone() const override { return std::make_unique<Halton>(*this); }

 private:
  std::vector<std::uint32_t> primes_;
};

// Counter-based SplitMix64 stream: point i is a pure function of (seed, i), so
// skip_to is O(1) and partitions reproduce the sequential stream exactly.
class PseudoRandom final : public PointGenerator {
 public:
  PseudoRandom(int dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {}

  void generate(std::uint64_t index, std::span<double> out) const override {
    std::uint64_t state = splitmix64(seed_ ^ splitmix64(index));
    for (int j = 0; j < dimension_; ++j) {
      state += 0x9e3779b97f4a7c15ULL;
      const std::uint64_t bits = splitmix64(state) >> 12;
      out[j] = clamp_coordinate((static_cast<double>(bits) + 0.5) * 0x1p-52);
    }
  }

  std::unique_ptr<PointGenerator> clone() const override { return std::make_unique<PseudoRandom>(*this); }

 private:
  int dimension_;
  std::uint64_t seed_;
};

}  // namespace

PointStream::PointStream(const SequenceSpec& spec) : spec_(spec), index_(spec.start_index) {
  if (spec.dimension < 1) throw std::invalid_argument("sequence dimension must be >= 1");
  if (spec.start_index > kMaxSequenceIndex) throw std::out_of_range("sequence start index overflow");
  switch (spec.kind) {
    case SequenceKind::GeneralizedFaure: {
      std::uint32_t base = spec.base;
      if (base == 0) {
        base = smallest_prime_at_least(static_cast<std::uint32_t>(spec.dimension));
      } else if (base >= 65536) {
        throw std::invalid_argument("generalized Faure base must be below 65536");
      } else if (!is_prime(base)) {
        throw std::invalid_argument("generalized Faure base " + std::to_string(base) + " is not prime");
      }
      generator_ = std::make_unique<GeneralizedFaure>(spec.dimension, base, spec.scramble_seed);
      break;
    }
    case SequenceKind::Halton:
      generator_ = std::make_unique<Halton>(spec.dimension);
      break;
    case SequenceKind::PseudoRandom:
      generator_ = std::make_unique<PseudoRandom>(spec.dimension, spec.scramble_seed);
      break;
  }
}

PointStream::~PointStream() = default;
PointStream::PointStream(PointStream&&) noexcept = default;
PointStream& PointStream::operator=(PointStream&&) noexcept = default;

PointStream::PointStream(const PointStream& other)
    : spec_(other.spec_), index_(other.index_), generator_(other.generator_->clone()) {}

PointStream& PointStream::operator=(const PointStream& other) {
  if (this != &other) {
    spec_ = other.spec_;
    index_ = other.index_;
    generator_ = other.generator_->clone();
  }
  return *this;
}

std::uint32_t PointStream::base() const { return generator_->base(); }

std::uint64_t PointStream::next_point(std::span<double> out) {
  if (out.size() != static_cast<std::size_t>(spec_.dimension)) {
    throw std::invalid_argument("point buffer does not match sequence dimension");
  }
  if (index_ > kMaxSequenceIndex) throw std::out_of_range("sequence index overflow");
  generator_->generate(index_, out);
  return index_++;
}

CubePoint PointStream::next_point() {
  CubePoint point;
  point.coordinates.resize(static_cast<std::size_t>(spec_.dimension));
  point.index = next_point(std::span<double>(point.coordinates));
  return point;
}

void PointStream::skip_to(std::uint64_t position) {
  if (position > kMaxSequenceIndex - spec_.start_index) throw std::out_of_range("sequence index overflow");
  index_ = spec_.start_index + position;
}

}  // namespace qvol
