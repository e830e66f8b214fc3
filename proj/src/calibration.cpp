#include "qvol/calibration.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "qvol/sampling.hpp"

namespace qvol {

namespace {

struct Node {
  double theta;
  double weight;
};

std::vector<Node> tanh_sinh_nodes(int level) {
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  constexpr double kTMax = 3.2;
  const double h = std::ldexp(1.0, -level);
  const int count = static_cast<int>(std::ceil(kTMax / h));
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(2 * count + 1));
  for (int k = -count; k <= count; ++k) {
    const double t = k * h;
    const double u = kHalfPi * std::sinh(t);
    const double cu = std::cosh(u);
    const double dx = h * kHalfPi * std::cosh(t) / (cu * cu);
    // theta = (pi/4)(1 + x), x = tanh(u), with 1 +- x formed without cancellation.
    double theta;
    if (t < 0.0) {
      theta = 0.25 * std::numbers::pi * (2.0 / (1.0 + std::exp(-2.0 * u)));
    } else {
      theta = kHalfPi - 0.25 * std::numbers::pi * (2.0 / (1.0 + std::exp(2.0 * u)));
    }
    nodes.push_back({theta, 0.25 * std::numbers::pi * dx});
  }
  return nodes;
}

}  // namespace

double simplex_integral(MetricKind kind, int n_dim, Manifold manifold, const BoundaryPolicy& policy, int level) {
  const int m = spectrum_coordinates(n_dim, manifold);
  if (m < 0 || n_dim > kMaxDim) throw std::invalid_argument("unsupported dimension for simplex integral");

  auto integrand = [&](std::span<const double> angles) {
    const HypersphericalPoint h = hyperspherical_map(angles);
    const double w = manifold == Manifold::Volume ? volume_weight(kind, h.values())
                                                  : boundary_weight(kind, h.values(), policy);
    return w * h.jacobian;
  };

  std::array<double, kMaxDim> angles{};
  if (m == 0) return integrand({});

  const std::vector<Node> nodes = tanh_sinh_nodes(level);
  std::function<double(int)> recurse = [&](int depth) -> double {
    double sum = 0.0;
    for (const Node& node : nodes) {
      angles[static_cast<std::size_t>(depth)] = node.theta;
      const double inner =
          depth + 1 == m ? integrand(std::span<const double>(angles.data(), static_cast<std::size_t>(m)))
                         : recurse(depth + 1);
      sum += node.weight * inner;
    }
    return sum;
  };
  return recurse(0);
}

std::vector<CalibrationEntry> calibrate_flag_constants(double flag_scale, double tolerance) {
  std::vector<CalibrationEntry> entries;
  for (int n = 2; n <= 4; ++n) {
    for (Manifold manifold : {Manifold::Volume, Manifold::Hyperarea}) {
      CalibrationEntry e;
      e.n_dim = n;
      e.manifold = manifold;
      e.integral = simplex_integral(MetricKind::Bures, n, manifold);
      e.flag = flag_constant(n, manifold) * flag_scale;
      e.analytic = known_bures_value(n, manifold);
      e.relative_error = std::abs(e.flag * e.integral / e.analytic - 1.0);
      entries.push_back(e);
      if (!(e.relative_error <= tolerance)) {
        std::ostringstream msg;
        msg << "flag constant calibration failed for N=" << n << ' ' << to_string(manifold)
            << ": relative error " << e.relative_error;
        throw CalibrationError(msg.str());
      }
    }
  }
  return entries;
}

}  // namespace qvol
