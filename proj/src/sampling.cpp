#include "qvol/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qvol {

HypersphericalPoint hyperspherical_map(std::span<const double> angles) {
  if (angles.size() + 1 > static_cast<std::size_t>(kMaxDim)) throw std::invalid_argument("too many angles");
  HypersphericalPoint out;
  out.size = static_cast<int>(angles.size()) + 1;
  double tail = 1.0;  // prod_{i<k} sin^2 theta_i
  double jacobian = 1.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double theta = angles[k];
    if (!(theta >= 0.0 && theta <= 0.5 * std::numbers::pi)) {
      throw std::domain_error("hyperspherical angle outside [0, pi/2]");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out.lambda[k] = c * c * tail;
    jacobian *= 2.0 * c * s * tail;
    tail *= s * s;
  }
  out.lambda[angles.size()] = tail;
  out.jacobian = jacobian;
  return out;
}

int spectrum_coordinates(int n_dim, Manifold manifold) {
  return manifold == Manifold::Volume ? n_dim - 1 : n_dim - 2;
}

int cube_dimension(int n_dim, Manifold manifold) {
  return 2 * n_dim * n_dim + spectrum_coordinates(n_dim, manifold);
}

StateSampler::StateSampler(int n_dim, Manifold manifold, std::vector<MetricKind> metrics, BoundaryPolicy policy,
                           SpectrumSampler spectrum_sampler)
    : n_dim_(n_dim),
      manifold_(manifold),
      metrics_(std::move(metrics)),
      policy_(policy),
      spectrum_sampler_(spectrum_sampler) {
  if (n_dim < 2 || n_dim > kMaxDim) throw std::invalid_argument("sampler dimension must lie in [2, 6]");
}

Spectrum StateSampler::sample_spectrum(std::span<const double> coords) const {
  const int m = spectrum_coordinates(n_dim_, manifold_);
  if (coords.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("spectrum coordinate count mismatch");
  Spectrum spectrum;
  spectrum.size = m + 1;
  if (spectrum_sampler_ == SpectrumSampler::Hyperspherical) {
    std::array<double, kMaxDim> angles{};
    for (int k = 0; k < m; ++k) angles[static_cast<std::size_t>(k)] = 0.5 * std::numbers::pi * coords[static_cast<std::size_t>(k)];
    const HypersphericalPoint h = hyperspherical_map(std::span<const double>(angles.data(), static_cast<std::size_t>(m)));
    spectrum.values = h.lambda;
    spectrum.sampling_density = std::pow(2.0 / std::numbers::pi, m) / h.jacobian;
  } else {
    double remaining = 1.0;
    double density = 1.0;
    for (int k = 0; k < m; ++k) {
      const double exponent = m - k;
      const double keep = std::exp(std::log1p(-coords[static_cast<std::size_t>(k)]) / exponent);
      spectrum.values[static_cast<std::size_t>(k)] = remaining * (1.0 - keep);
      remaining *= keep;
      density *= exponent;
    }
    spectrum.values[static_cast<std::size_t>(m)] = remaining;
    spectrum.sampling_density = density;
  }
  return spectrum;
}

void StateSampler::sample(std::span<const double> coordinates, std::uint64_t index, StateSample& out) const {
  if (coordinates.size() != static_cast<std::size_t>(cube_dimension())) {
    throw std::invalid_argument("cube point dimension does not match sampler");
  }
  const std::size_t frame_coords = static_cast<std::size_t>(2 * n_dim_ * n_dim_);
  out.cube_index = index;
  out.frame = haar_frame_from_uniforms(coordinates.first(frame_coords), n_dim_);
  out.spectrum = sample_spectrum(coordinates.subspan(frame_coords));
  out.rho = conjugate_diagonal(out.frame, out.spectrum.view());

  out.weights = WeightBundle{};
  out.weights.manifold = manifold_;
  const double inv_density = 1.0 / out.spectrum.sampling_density;
  for (MetricKind kind : metrics_) {
    const double w = manifold_ == Manifold::Volume ? volume_weight(kind, out.spectrum.view())
                                                   : boundary_weight(kind, out.spectrum.view(), policy_);
    out.weights.active.set(metric_index(kind));
    out.weights.weights[metric_index(kind)] = w * inv_density;
  }
}

StateSample StateSampler::sample(const CubePoint& point) const {
  StateSample out;
  sample(point.coordinates, point.index, out);
  return out;
}

StateSample sample_state(const CubePoint& point, Manifold manifold, std::span<const MetricKind> metrics,
                         const BoundaryPolicy& policy) {
  for (int n = 2; n <= kMaxDim; ++n) {
    if (static_cast<std::size_t>(cube_dimension(n, manifold)) == point.coordinates.size()) {
      return StateSampler(n, manifold, {metrics.begin(), metrics.end()}, policy).sample(point);
    }
  }
  throw std::invalid_argument("cube point dimension matches no supported N");
}

}  // namespace qvol
