#include "qvol/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qvol {

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Bures: return "bures";
    case MetricKind::KuboMori: return "kubo-mori";
    case MetricKind::ArithAverage: return "arith-average";
    case MetricKind::WignerYanase: return "wigner-yanase";
    case MetricKind::Gks: return "gks";
    case MetricKind::GeomAverage: return "geom-average";
  }
  return "unknown";
}

std::string_view table_label(MetricKind kind) {
  switch (kind) {
    case MetricKind::Bures: return "Bures";
    case MetricKind::KuboMori: return "KM";
    case MetricKind::ArithAverage: return "arith";
    case MetricKind::WignerYanase: return "WY";
    case MetricKind::Gks: return "GKS";
    case MetricKind::GeomAverage: return "geom";
  }
  return "?";
}

MetricKind parse_metric(std::string_view name) {
  for (MetricKind kind : kAllMetrics) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "km") return MetricKind::KuboMori;
  if (name == "arith") return MetricKind::ArithAverage;
  if (name == "wy") return MetricKind::WignerYanase;
  if (name == "geom") return MetricKind::GeomAverage;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

std::string_view to_string(Manifold manifold) {
  return manifold == Manifold::Volume ? "volume" : "hyperarea";
}

Manifold parse_manifold(std::string_view name) {
  if (name == "volume") return Manifold::Volume;
  if (name == "hyperarea") return Manifold::Hyperarea;
  throw std::invalid_argument("unknown manifold: " + std::string(name));
}

std::string_view to_string(BoundaryPolicyKind kind) {
  switch (kind) {
    case BoundaryPolicyKind::Auto: return "auto";
    case BoundaryPolicyKind::Limit: return "limit";
    case BoundaryPolicyKind::BuresPair: return "bures-pair";
    case BoundaryPolicyKind::Epsilon: return "epsilon";
  }
  return "unknown";
}

BoundaryPolicyKind parse_boundary_policy(std::string_view name) {
  if (name == "auto") return BoundaryPolicyKind::Auto;
  if (name == "limit") return BoundaryPolicyKind::Limit;
  if (name == "bures-pair") return BoundaryPolicyKind::BuresPair;
  if (name == "epsilon") return BoundaryPolicyKind::Epsilon;
  throw std::invalid_argument("unknown boundary policy: " + std::string(name));
}

BoundaryPolicyKind BoundaryPolicy::resolve(MetricKind metric) const {
  if (kind != BoundaryPolicyKind::Auto) return kind;
  if (metric == MetricKind::KuboMori || metric == MetricKind::GeomAverage) return BoundaryPolicyKind::BuresPair;
  return BoundaryPolicyKind::Limit;
}

namespace {

// (ln hi - ln lo) / (hi - lo) for hi >= lo > 0.  Close arguments go through
// 2 artanh(d / s) / d, which avoids the cancelling log difference.
double kubo_mori(double hi, double lo) {
  const double d = hi - lo;
  if (lo < 0.5 * hi) return (std::log(hi) - std::log(lo)) / d;
  const double s = hi + lo;
  if (d < kDegenerateSeparation * hi) {
    const double z2 = (d / s) * (d / s);
    return 2.0 / s * (1.0 + z2 / 3.0 + z2 * z2 / 5.0);
  }
  return 2.0 * std::atanh(d / s) / d;
}

[[noreturn]] void throw_divergent(MetricKind kind) {
  throw DivergentBoundaryFactor("divergent boundary factor: c_" + std::string(to_string(kind)) +
                                "(x, 0) is infinite");
}

}  // namespace

double mc_function(MetricKind kind, double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  if (!(lo >= 0.0) || !(hi > 0.0) || !std::isfinite(hi)) {
    throw std::domain_error("Morozova-Chentsov function needs x, y >= 0, not both zero");
  }
  switch (kind) {
    case MetricKind::Bures:
      return 2.0 / (hi + lo);
    case MetricKind::KuboMori:
      if (lo == 0.0) throw_divergent(kind);
      return kubo_mori(hi, lo);
    case MetricKind::ArithAverage:
      return 4.0 * (hi + lo) / (hi * hi + 6.0 * hi * lo + lo * lo);
    case MetricKind::WignerYanase: {
      const double s = std::sqrt(hi) + std::sqrt(lo);
      return 4.0 / (s * s);
    }
    case MetricKind::Gks:
      // (x/y)^(x/(y-x)) = exp(-x c_KM(x, y)), which inherits the stable
      // Kubo-Mori evaluation near coincidence.
      if (lo == 0.0) return std::numbers::e / hi;
      return std::numbers::e / lo * std::exp(-hi * kubo_mori(hi, lo));
    case MetricKind::GeomAverage:
      if (lo == 0.0) throw_divergent(kind);
      return 0.5 / (std::sqrt(hi) * std::sqrt(lo));
  }
  throw std::invalid_argument("unknown metric kind");
}

double pair_factor(MetricKind kind, double x, double y) {
  const double d = x - y;
  if (d == 0.0) return 0.0;
  return 0.5 * d * d * mc_function(kind, x, y);
}

namespace {

void check_simplex(std::span<const double> spectrum) {
  if (spectrum.empty()) throw std::domain_error("empty spectrum");
  double sum = 0.0;
  for (double v : spectrum) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("spectrum entries must be strictly positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::domain_error("spectrum does not sum to 1");
}

double interior_factor(MetricKind kind, std::span<const double> spectrum) {
  double w = 1.0;
  const std::size_t m = spectrum.size();
  for (std::size_t i = 0; i < m; ++i) w /= std::sqrt(spectrum[i]);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = j + 1; k < m; ++k) w *= pair_factor(kind, spectrum[j], spectrum[k]);
  return w;
}

}  // namespace

double volume_weight(MetricKind kind, std::span<const double> spectrum) {
  check_simplex(spectrum);
  const int n = static_cast<int>(spectrum.size());
  return std::ldexp(interior_factor(kind, spectrum), -(n - 1));
}

double boundary_pair_factor(MetricKind kind, double lambda, const BoundaryPolicy& policy) {
  switch (policy.resolve(kind)) {
    case BoundaryPolicyKind::Limit:
      switch (kind) {
        case MetricKind::Bures: return lambda;
        case MetricKind::ArithAverage:
        case MetricKind::WignerYanase: return 2.0 * lambda;
        case MetricKind::Gks: return 0.5 * std::numbers::e * lambda;
        case MetricKind::KuboMori:
        case MetricKind::GeomAverage: throw_divergent(kind);
      }
      break;
    case BoundaryPolicyKind::BuresPair:
      return lambda;
    case BoundaryPolicyKind::Epsilon:
      if (!(policy.epsilon > 0.0)) throw std::domain_error("epsilon policy needs epsilon > 0");
      return pair_factor(kind, lambda, policy.epsilon);
    case BoundaryPolicyKind::Auto:
      break;
  }
  throw std::logic_error("unresolved boundary policy");
}

double boundary_weight(MetricKind kind, std::span<const double> spectrum, const BoundaryPolicy& policy) {
  check_simplex(spectrum);
  const int nonzero = static_cast<int>(spectrum.size());
  double w = std::ldexp(interior_factor(kind, spectrum), -(nonzero - 1));
  for (double v : spectrum) w *= boundary_pair_factor(kind, v, policy);
  return w;
}

double AnalyticParams::manifold_dimension() const {
  return (n_dim - rank_deficiency) * (1.0 + (n_dim + rank_deficiency - 1) * beta / 2.0) - 1.0;
}

AnalyticVolume analytic_bures_volume(const AnalyticParams& params) {
  const int big_n = params.n_dim;
  const int n = params.rank_deficiency;
  if (big_n < 2) throw std::domain_error("analytic Bures volume needs N >= 2");
  if (n < 0 || n > big_n - 1) throw std::domain_error("rank deficiency must lie in [0, N-1]");
  if (params.beta != 1 && params.beta != 2) throw std::domain_error("beta must be 1 or 2");

  const double beta = params.beta;
  const double d = params.manifold_dimension();
  double log_value = -d * std::numbers::ln2 + 0.5 * (d + 1.0) * std::log(std::numbers::pi) - std::lgamma(0.5 * (d + 1.0));
  if (n > 0) {
    for (int j = 1; j <= big_n - n; ++j) {
      log_value += std::lgamma(j * beta / 2.0) + std::lgamma(1.0 + (2 * n + j - 1) * beta / 2.0) -
                   std::lgamma((n + j) * beta / 2.0) - std::lgamma(1.0 + (n + j - 1) * beta / 2.0);
    }
  }
  return {log_value, std::exp(log_value)};
}

double known_bures_value(int n_dim, Manifold manifold) {
  return analytic_bures_volume({n_dim, manifold == Manifold::Volume ? 0 : 1, 2}).value;
}

int manifold_dimension(int n_dim, Manifold manifold) {
  return n_dim * n_dim - (manifold == Manifold::Volume ? 1 : 2);
}

double flag_constant(int n_dim, Manifold manifold) {
  if (n_dim < 2) throw std::domain_error("flag constant needs N >= 2");
  double log_value = 0.5 * n_dim * (n_dim - 1) * std::log(std::numbers::pi);
  for (int k = 1; k < n_dim; ++k) log_value -= std::lgamma(k + 1.0);
  log_value -= std::lgamma(manifold == Manifold::Volume ? n_dim + 1.0 : static_cast<double>(n_dim));
  return std::exp(log_value);
}

double ConjectureConstants::km_ratio(int n_dim) { return std::ldexp(1.0, n_dim * (n_dim - 1) / 2); }

double ConjectureConstants::sd_volume_factor(int dim) { return std::pow(sd_scale, 0.5 * dim); }

}  // namespace qvol
