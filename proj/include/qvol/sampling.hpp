#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <span>
#include <vector>

#include "qvol/lds.hpp"
#include "qvol/linalg.hpp"
#include "qvol/measures.hpp"

namespace qvol {

struct HypersphericalPoint {
  int size = 0;  ///< m + 1 eigenvalues for m angles
  std::array<double, kMaxDim> lambda{};
  double jacobian = 0.0;  ///< |det d(lambda_1..lambda_m) / d(theta_1..theta_m)|

  std::span<const double> values() const { return {lambda.data(), static_cast<std::size_t>(size)}; }
};

/// lambda_k = cos^2 theta_k prod_{i<k} sin^2 theta_i, lambda_{m+1} = prod sin^2 theta_i.
/// Angles must lie in [0, pi/2].
HypersphericalPoint hyperspherical_map(std::span<const double> angles);

struct Spectrum {
  int size = 0;
  std::array<double, kMaxDim> values{};
  /// Sampler density with respect to Lebesgue measure on the first size-1
  /// coordinates of the simplex.
  double sampling_density = 0.0;

  std::span<const double> view() const { return {values.data(), static_cast<std::size_t>(size)}; }
};

struct WeightBundle {
  Manifold manifold = Manifold::Volume;
  std::bitset<kMetricCount> active;
  std::array<double, kMetricCount> weights{};

  double operator[](MetricKind kind) const { return weights[metric_index(kind)]; }
  bool has(MetricKind kind) const { return active.test(metric_index(kind)); }
};

struct StateSample {
  Spectrum spectrum;
  ComplexMatrix frame;
  ComplexMatrix rho;
  WeightBundle weights;
  std::uint64_t cube_index = 0;
};

enum class SpectrumSampler : std::uint8_t {
  Hyperspherical,    ///< angles uniform in the cube
  UniformDirichlet,  ///< uniform on the simplex by sequential Beta inversion
};

/// Number of simplex coordinates a sample consumes: N-1 (volume) or N-2.
int spectrum_coordinates(int n_dim, Manifold manifold);
/// 2N^2 frame coordinates plus the spectrum coordinates.
int cube_dimension(int n_dim, Manifold manifold);

/// Maps cube points to weighted density-matrix samples.  Weights are the
/// metric densities divided by the sampler's simplex density, so
/// flag_constant * E[weight] estimates the metric volume.
class StateSampler {
 public:
  StateSampler(int n_dim, Manifold manifold, std::vector<MetricKind> metrics, BoundaryPolicy policy = {},
               SpectrumSampler spectrum_sampler = SpectrumSampler::Hyperspherical);

  int n_dim() const { return n_dim_; }
  Manifold manifold() const { return manifold_; }
  int cube_dimension() const { return qvol::cube_dimension(n_dim_, manifold_); }
  const std::vector<MetricKind>& metrics() const { return metrics_; }
  const BoundaryPolicy& policy() const { return policy_; }

  void sample(std::span<const double> coordinates, std::uint64_t index, StateSample& out) const;
  StateSample sample(const CubePoint& point) const;

  /// Spectrum part alone (no frame or weights).
  Spectrum sample_spectrum(std::span<const double> spectrum_coordinates) const;

 private:
  int n_dim_;
  Manifold manifold_;
  std::vector<MetricKind> metrics_;
  BoundaryPolicy policy_;
  SpectrumSampler spectrum_sampler_;
};

/// One-shot form; N is inferred from the point dimension.
StateSample sample_state(const CubePoint& point, Manifold manifold, std::span<const MetricKind> metrics,
                         const BoundaryPolicy& policy = {});

}  // namespace qvol
