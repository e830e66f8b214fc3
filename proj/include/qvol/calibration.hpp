#pragma once

#include <stdexcept>
#include <vector>

#include "qvol/measures.hpp"

namespace qvol {

/// Deterministic integral of the volume (or hyperarea) weight over the
/// unordered coordinate simplex, by a tanh-sinh product rule on the
/// hyperspherical angles.  The angle substitution absorbs the lambda^-1/2
/// edge singularities; tanh-sinh absorbs the logarithmic ones of kubo-mori.
/// Step size is 2^-level.  Practical for up to three angles.
double simplex_integral(MetricKind kind, int n_dim, Manifold manifold, const BoundaryPolicy& policy = {},
                        int level = 4);

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationEntry {
  int n_dim = 0;
  Manifold manifold = Manifold::Volume;
  double integral = 0.0;  ///< simplex integral of the Bures weight
  double flag = 0.0;      ///< flag_constant * scale
  double analytic = 0.0;  ///< closed-form Bures value
  double relative_error = 0.0;
};

inline constexpr double kCalibrationTolerance = 1e-6;

/// Checks flag_constant(N) * I_Bures(N) against the closed form for
/// N in {2, 3, 4} and both manifolds.  `flag_scale` perturbs the constant
/// (test hook).  Throws CalibrationError on any mismatch beyond `tolerance`.
std::vector<CalibrationEntry> calibrate_flag_constants(double flag_scale = 1.0,
                                                       double tolerance = kCalibrationTolerance);

}  // namespace qvol
