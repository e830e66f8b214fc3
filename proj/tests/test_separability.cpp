#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qvol/sampling.hpp"
#include "qvol/separability.hpp"

using namespace qvol;

namespace {

ComplexMatrix projector(const std::vector<Complex>& psi) {
  const int n = static_cast<int>(psi.size());
  ComplexMatrix m(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = psi[static_cast<std::size_t>(r)] * std::conj(psi[static_cast<std::size_t>(c)]);
  return m;
}

std::vector<Complex> random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  std::vector<Complex> v(static_cast<std::size_t>(n));
  double norm = 0.0;
  for (auto& x : v) {
    x = {g(rng), g(rng)};
    norm += std::norm(x);
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

ComplexMatrix random_unitary(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0x1p-40, 1.0 - 0x1p-40);
  std::vector<double> coords(static_cast<std::size_t>(2 * n * n));
  for (double& x : coords) x = u(rng);
  return haar_frame_from_uniforms(coords, n);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int na = a.dim(), nb = b.dim();
  ComplexMatrix out(na * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l) out(nb * i + k, nb * j + l) = a(i, j) * b(k, l);
  return out;
}

std::vector<Complex> kron(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  std::vector<Complex> out;
  for (Complex x : a)
    for (Complex y : b) out.push_back(x * y);
  return out;
}

ComplexMatrix bell(int second) {
  const double h = std::sqrt(0.5);
  std::vector<Complex> psi(6, 0.0);
  psi[0] = h;
  psi[static_cast<std::size_t>(second)] = h;
  return projector(psi);
}

// Random qubit-qutrit states from the volume sampler.
std::vector<ComplexMatrix> sampled_states(int count, std::uint64_t seed) {
  const StateSampler sampler(6, Manifold::Volume, {MetricKind::Bures});
  PointStream stream({SequenceKind::PseudoRandom, sampler.cube_dimension(), 0, seed});
  std::vector<ComplexMatrix> out;
  for (int i = 0; i < count; ++i) out.push_back(sampler.sample(stream.next_point()).rho);
  return out;
}

}  // namespace

TEST_CASE("split selection by dimension") {
  const auto six = splits_for_dimension(6);
  REQUIRE(six);
  CHECK(six->first == kSplitA);
  CHECK(six->second == kSplitB);
  const auto four = splits_for_dimension(4);
  REQUIRE(four);
  CHECK(four->first == TensorSplit{2, 2});
  CHECK_FALSE(splits_for_dimension(5));
  CHECK_FALSE(splits_for_dimension(3));
  CHECK_FALSE(splits_for_dimension(2));
  CHECK_THROWS_AS(SeparabilityClassifier::for_dimension(5), std::invalid_argument);
  CHECK_THROWS_AS(SeparabilityClassifier(TensorSplit{2, 3}, TensorSplit{2, 2}), std::invalid_argument);
}

TEST_CASE("maximally mixed and product states pass") {
  ComplexMatrix mixed = ComplexMatrix::identity(6);
  mixed *= 1.0 / 6.0;
  CHECK(classify(mixed) == SeparabilityFlags{true, true});

  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    // The two readings are different tensor structures on C^6, so a product
    // in one is generally entangled in the other.
    const ComplexMatrix product = projector(kron(random_vector(rng, 2), random_vector(rng, 3)));
    CHECK(classify(product).pass_a);
    const ComplexMatrix other = projector(kron(random_vector(rng, 3), random_vector(rng, 2)));
    CHECK(classify(other).pass_b);
  }
}

TEST_CASE("Bell states are detected") {
  // |00> + |11> with r = 3a + b: entangled under the 2 x 3 reading only.
  CHECK(classify(bell(4)) == SeparabilityFlags{false, true});
  // |00> + |12>: entangled under both readings.
  const SeparabilityFlags flags = classify(bell(5));
  CHECK_FALSE(flags.pass_a);
  CHECK_FALSE(flags.pass_b);
  CHECK_FALSE(flags.either());
}

TEST_CASE("isotropic mixtures switch at the exact threshold") {
  // (1-p) I/6 + p |Bell><Bell| has partial-transpose minimum (1-p)/6 - p/2.
  for (double p : {0.01, 0.1, 0.2, 0.24, 0.26, 0.3, 0.6}) {
    ComplexMatrix rho = ComplexMatrix::identity(6);
    rho *= (1.0 - p) / 6.0;
    rho += p * bell(5);
    const double expected = (1.0 - p) / 6.0 - p / 2.0;
    CHECK(min_eigenvalue(partial_transpose(rho, kSplitA)) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(min_eigenvalue(partial_transpose(rho, kSplitB)) == doctest::Approx(expected).epsilon(1e-12));
    const bool separable = p < 0.25;
    CHECK(classify(rho) == SeparabilityFlags{separable, separable});
  }
  ComplexMatrix near_mixed = ComplexMatrix::identity(6);
  near_mixed *= 0.99 / 6.0;
  near_mixed += 0.01 * bell(4);
  CHECK(classify(near_mixed).both());
}

TEST_CASE("partial transposes of sampled states keep unit trace and hermiticity") {
  for (const ComplexMatrix& rho : sampled_states(500, 3)) {
    for (TensorSplit split : {kSplitA, kSplitB}) {
      const auto values = hermitian_eigenvalues(partial_transpose(rho, split));
      double sum = 0.0;
      for (int k = 0; k < 6; ++k) sum += values[static_cast<std::size_t>(k)];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(hermiticity_defect(partial_transpose(rho, split)) < 1e-15);
    }
  }
}

TEST_CASE("the PPT set is convex") {
  std::vector<ComplexMatrix> passing_a, passing_b;
  for (const ComplexMatrix& rho : sampled_states(20000, 11)) {
    const SeparabilityFlags f = classify(rho);
    if (f.pass_a) passing_a.push_back(rho);
    if (f.pass_b) passing_b.push_back(rho);
  }
  REQUIRE(passing_a.size() > 100);
  REQUIRE(passing_b.size() > 100);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = t(rng);
    const auto& pa = passing_a;
    const auto& pb = passing_b;
    const ComplexMatrix mix_a = s * pa[rng() % pa.size()] + (1.0 - s) * pa[rng() % pa.size()];
    const ComplexMatrix mix_b = s * pb[rng() % pb.size()] + (1.0 - s) * pb[rng() % pb.size()];
    CHECK(ppt_pass(mix_a, kSplitA));
    CHECK(ppt_pass(mix_b, kSplitB));
  }
}

TEST_CASE("local unitaries leave the partial-transpose spectrum unchanged") {
  std::mt19937_64 rng(8);
  for (const ComplexMatrix& rho : sampled_states(300, 21)) {
    const ComplexMatrix ua = kron(random_unitary(rng, 2), random_unitary(rng, 3));
    const ComplexMatrix rotated_a = ua * rho * ua.adjoint();
    CHECK(min_eigenvalue(partial_transpose(rotated_a, kSplitA)) ==
          doctest::Approx(min_eigenvalue(partial_transpose(rho, kSplitA))).epsilon(1e-10).scale(1.0));

    const ComplexMatrix ub = kron(random_unitary(rng, 3), random_unitary(rng, 2));
    const ComplexMatrix rotated_b = ub * rho * ub.adjoint();
    CHECK(min_eigenvalue(partial_transpose(rotated_b, kSplitB)) ==
          doctest::Approx(min_eigenvalue(partial_transpose(rho, kSplitB))).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("classifier agrees with the per-split test and the tolerance guard") {
  const SeparabilityClassifier classifier = SeparabilityClassifier::for_dimension(6);
  int pass_a = 0;
  const auto states = sampled_states(5000, 17);
  for (const ComplexMatrix& rho : states) {
    const SeparabilityFlags f = classifier.classify(rho);
    CHECK(f.pass_a == ppt_pass(rho, kSplitA));
    CHECK(f.pass_b == ppt_pass(rho, kSplitB));
    pass_a += f.pass_a;
  }
  CHECK(pass_a > 0);
  CHECK(pass_a < 1000);

  // A state whose partial transpose has a tiny negative eigenvalue passes
  // only with a wide enough tolerance.
  ComplexMatrix rho = ComplexMatrix::identity(6);
  const double p = 0.25 + 1e-9;
  rho *= (1.0 - p) / 6.0;
  rho += p * bell(5);
  CHECK_FALSE(ppt_pass(rho, kSplitA));
  CHECK(ppt_pass(rho, kSplitA, 1e-8));
}
