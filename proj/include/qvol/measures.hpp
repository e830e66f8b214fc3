#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

namespace qvol {

/// The six monotone metrics, each identified by its Morozova-Chentsov
/// function c(x, y).
enum class MetricKind : std::uint8_t {
  Bures,         // 2 / (x + y)
  KuboMori,      // (ln x - ln y) / (x - y)
  ArithAverage,  // 4 (x + y) / (x^2 + 6xy + y^2)
  WignerYanase,  // 4 / (sqrt x + sqrt y)^2
  Gks,           // (x / y)^(x / (y - x)) e / y
  GeomAverage,   // 1 / (2 sqrt(xy)); note c(x, x) = 1 / (2x)
};

inline constexpr std::size_t kMetricCount = 6;
inline constexpr std::array<MetricKind, kMetricCount> kAllMetrics = {
    MetricKind::Bures, MetricKind::KuboMori,     MetricKind::ArithAverage,
    MetricKind::WignerYanase, MetricKind::Gks, MetricKind::GeomAverage};

constexpr std::size_t metric_index(MetricKind kind) { return static_cast<std::size_t>(kind); }

/// Canonical name ("bures", "kubo-mori", ...).
std::string_view to_string(MetricKind kind);
/// Short table label ("Bures", "KM", "arith", "WY", "GKS", "geom").
std::string_view table_label(MetricKind kind);
MetricKind parse_metric(std::string_view name);

enum class Manifold : std::uint8_t { Volume, Hyperarea };
std::string_view to_string(Manifold manifold);
Manifold parse_manifold(std::string_view name);

/// Raised where a pair factor c(lambda, 0) diverges and the active policy
/// offers no regularization.
class DivergentBoundaryFactor : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Treatment of the pairs (lambda_j, 0) on the rank-deficient boundary.
enum class BoundaryPolicyKind : std::uint8_t {
  Auto,       ///< BuresPair for kubo-mori and geom-average, Limit otherwise
  Limit,      ///< F = lim_{mu->0} (lambda - mu)^2 c(lambda, mu) / 2
  BuresPair,  ///< F = lambda for every metric
  Epsilon,    ///< exact pair factor evaluated at mu = epsilon
};

struct BoundaryPolicy {
  BoundaryPolicyKind kind = BoundaryPolicyKind::Auto;
  double epsilon = 1e-12;

  /// Concrete policy used for `metric` (resolves Auto).
  BoundaryPolicyKind resolve(MetricKind metric) const;
  friend bool operator==(const BoundaryPolicy&, const BoundaryPolicy&) = default;
};

std::string_view to_string(BoundaryPolicyKind kind);
BoundaryPolicyKind parse_boundary_policy(std::string_view name);

/// Relative separation below which mc_function switches to its
/// coincident-argument branch.
inline constexpr double kDegenerateSeparation = 1e-8;

/// c_kind(x, y).  Symmetric; x, y >= 0 and not both zero.  kubo-mori and
/// geom-average diverge when either argument is zero and throw
/// DivergentBoundaryFactor.
double mc_function(MetricKind kind, double x, double y);

/// (x - y)^2 c(x, y) / 2: the metric coefficient of each real direction of
/// the eigenframe rotation mixing eigenvalues x and y.
double pair_factor(MetricKind kind, double x, double y);

/// Volume density with respect to d lambda_1 ... d lambda_{N-1} on the
/// coordinate simplex, per unit flag-manifold volume:
///   2^-(N-1) prod_i lambda_i^-1/2 prod_{j<k} (lambda_j - lambda_k)^2 c(lambda_j, lambda_k) / 2
double volume_weight(MetricKind kind, std::span<const double> spectrum);

/// Zero-eigenvalue pair factor F(lambda) under `policy`.
double boundary_pair_factor(MetricKind kind, double lambda, const BoundaryPolicy& policy);

/// Hyperarea density of the rank N-1 boundary; `spectrum` holds the N-1
/// non-zero eigenvalues.
double boundary_weight(MetricKind kind, std::span<const double> spectrum, const BoundaryPolicy& policy);

/// Parameters of the closed-form Bures volume of rank N-n states.
struct AnalyticParams {
  int n_dim = 6;
  int rank_deficiency = 0;
  int beta = 2;

  /// (N - n)[1 + (N + n - 1) beta / 2] - 1
  double manifold_dimension() const;
};

struct AnalyticVolume {
  double log_value = 0.0;
  double value = 0.0;
};

AnalyticVolume analytic_bures_volume(const AnalyticParams& params);

/// Convenience: S^(2)_{N,0} for Volume, S^(2)_{N,1} for Hyperarea.
double known_bures_value(int n_dim, Manifold manifold);

/// Real dimension of the full (N^2 - 1) or boundary (N^2 - 2) manifold.
int manifold_dimension(int n_dim, Manifold manifold);

/// Flag-manifold volume divided by the ordering redundancy (N! for volume,
/// (N-1)! for hyperarea):  pi^(N(N-1)/2) / (prod_{k<N} k! * N!) etc.
double flag_constant(int n_dim, Manifold manifold);

struct ConjectureConstants {
  static constexpr double silver_mean = 0.41421356237309504880;  // sqrt(2) - 1
  static constexpr double sd_scale = 4.0;
  /// Conjectured Kubo-Mori / Bures volume ratio 2^(N(N-1)/2).
  static double km_ratio(int n_dim);
  /// Factor converting a Bures volume of real dimension `dim` to the
  /// statistical-distinguishability metric (= sd_scale^(dim/2)).
  static double sd_volume_factor(int dim);
};

}  // namespace qvol
