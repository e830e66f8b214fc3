#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qvol/calibration.hpp"

using namespace qvol;

TEST_CASE("qubit Bures integrals against Gauss-Chebyshev") {
  // int_0^1 f(l) / sqrt(l(1-l)) dl = (pi/m) sum f((1 + cos((2k-1)pi/2m)) / 2),
  // exact for the quadratic f(l) = (2l - 1)^2 / 2 of the qubit Bures weight.
  const int m = 8;
  double oracle = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double l = 0.5 * (1.0 + std::cos((2 * k - 1) * std::numbers::pi / (2 * m)));
    oracle += std::numbers::pi / m * 0.5 * (2 * l - 1) * (2 * l - 1);
  }
  CHECK(oracle == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  CHECK(simplex_integral(MetricKind::Bures, 2, Manifold::Volume) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(simplex_integral(MetricKind::Bures, 2, Manifold::Hyperarea) == 1.0);
}

TEST_CASE("quadrature level refinement is converged") {
  for (MetricKind kind : {MetricKind::Bures, MetricKind::KuboMori, MetricKind::Gks}) {
    const double coarse = simplex_integral(kind, 3, Manifold::Volume, {}, 4);
    const double fine = simplex_integral(kind, 3, Manifold::Volume, {}, 5);
    CHECK(std::abs(coarse / fine - 1.0) < 1e-10);
  }
}

TEST_CASE("flag constants reproduce the closed form for N = 2, 3, 4") {
  const auto entries = calibrate_flag_constants();
  CHECK(entries.size() == 6);
  for (const CalibrationEntry& e : entries) {
    INFO("N=" << e.n_dim << ' ' << to_string(e.manifold));
    CHECK(e.relative_error < 1e-6);
  }
}

TEST_CASE("perturbed flag constant is refused") {
  CHECK_THROWS_AS(calibrate_flag_constants(1.001), CalibrationError);
}

TEST_CASE("Kubo-Mori to Bures volume ratio is 2^(N(N-1)/2) at N = 2, 3") {
  for (int n : {2, 3}) {
    const double ratio = simplex_integral(MetricKind::KuboMori, n, Manifold::Volume) /
                         simplex_integral(MetricKind::Bures, n, Manifold::Volume);
    CHECK(std::abs(ratio / ConjectureConstants::km_ratio(n) - 1.0) < 1e-4);
  }
}

TEST_CASE("divergent hyperarea integrand under the limit policy") {
  CHECK_THROWS_AS(simplex_integral(MetricKind::KuboMori, 3, Manifold::Hyperarea, {BoundaryPolicyKind::Limit}),
                  DivergentBoundaryFactor);
}
