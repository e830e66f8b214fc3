#include "qvol/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qvol {

ComplexMatrix::ComplexMatrix(int n) : n_(n) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("matrix dimension out of range");
}

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(static_cast<int>(values.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(n_);
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix& ComplexMatrix::operator*=(double s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) (*this)(r, c) += other(r, c);
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int n = a.dim();
  ComplexMatrix out(n);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) {
      const Complex ark = a(r, k);
      for (int c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out = a;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) out(r, c) -= b(r, c);
  return out;
}

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (int r = 0; r < m.dim(); ++r)
    for (int c = 0; c < m.dim(); ++c) best = std::max(best, std::abs(m(r, c)));
  return best;
}

double hermiticity_defect(const ComplexMatrix& m) { return max_abs(m - m.adjoint()); }

double unitarity_defect(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - ComplexMatrix::identity(u.dim()));
}

Complex determinant(const ComplexMatrix& m) {
  ComplexMatrix a = m;
  const int n = a.dim();
  Complex det = 1.0;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > std::abs(a(pivot, k))) pivot = r;
    if (a(pivot, k) == Complex(0.0)) return 0.0;
    if (pivot != k) {
      for (int c = 0; c < n; ++c) std::swap(a(k, c), a(pivot, c));
      det = -det;
    }
    det *= a(k, k);
    for (int r = k + 1; r < n; ++r) {
      const Complex f = a(r, k) / a(k, k);
      for (int c = k; c < n; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return det;
}

ComplexMatrix conjugate_diagonal(const ComplexMatrix& a, std::span<const double> d) {
  const int n = a.dim();
  const int m = static_cast<int>(d.size());
  ComplexMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < m; ++k) acc += a(i, k) * d[static_cast<std::size_t>(k)] * std::conj(a(j, k));
      out(i, j) = acc;
      out(j, i) = std::conj(acc);
    }
    out(i, i) = out(i, i).real();
  }
  return out;
}

namespace {

// Cyclic Jacobi on a Hermitian matrix.  Each rotation
//   J = [[c, s e^{i phi}], [-s e^{-i phi}, c]],  e^{i phi} = a_pq / |a_pq|
// zeroes a_pq in J^dagger A J.  On return `a` is diagonal.
void jacobi_diagonalize(ComplexMatrix& a, ComplexMatrix* v) {
  const int n = a.dim();
  for (int i = 0; i < n; ++i) a(i, i) = a(i, i).real();

  double total = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) total += std::norm(a(r, c));
  if (total == 0.0) return;

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off <= 1e-34 * total) return;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex b = a(p, q);
        const double mag = std::abs(b);
        if (mag <= 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex ph = b / mag;
        const Complex s_ph = s * ph;
        const Complex s_phc = s * std::conj(ph);

        for (int k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - s_phc * akq;
          a(k, q) = s_ph * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - s_ph * aqk;
          a(q, k) = s_phc * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;

        if (v != nullptr) {
          ComplexMatrix& vm = *v;
          for (int k = 0; k < n; ++k) {
            const Complex vkp = vm(k, p);
            const Complex vkq = vm(k, q);
            vm(k, p) = c * vkp - s_phc * vkq;
            vm(k, q) = s_ph * vkp + c * vkq;
          }
        }
      }
    }
  }
  throw std::runtime_error("Jacobi eigensolver did not converge");
}

}  // namespace

EigenSystem hermitian_eigensystem(const ComplexMatrix& h) {
  const int n = h.dim();
  ComplexMatrix a = h;
  ComplexMatrix v = ComplexMatrix::identity(n);
  jacobi_diagonalize(a, &v);

  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::sort(order.begin(), order.begin() + n,
            [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

  EigenSystem out;
  out.n = n;
  out.vectors = ComplexMatrix(n);
  for (int k = 0; k < n; ++k) {
    out.values[static_cast<std::size_t>(k)] = a(order[k], order[k]).real();
    for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::array<double, kMaxDim> hermitian_eigenvalues(const ComplexMatrix& h) {
  ComplexMatrix a = h;
  jacobi_diagonalize(a, nullptr);
  std::array<double, kMaxDim> values{};
  for (int i = 0; i < h.dim(); ++i) values[static_cast<std::size_t>(i)] = a(i, i).real();
  std::sort(values.begin(), values.begin() + h.dim(), std::greater<>());
  return values;
}

double min_eigenvalue(const ComplexMatrix& h) {
  return hermitian_eigenvalues(h)[static_cast<std::size_t>(h.dim() - 1)];
}

ComplexMatrix partial_transpose(const ComplexMatrix& rho, TensorSplit split) {
  if (split.dim_a < 1 || split.dim_b < 1 || split.dim() != rho.dim()) {
    throw std::invalid_argument("tensor split incompatible with matrix dimension");
  }
  const int da = split.dim_a;
  const int db = split.dim_b;
  ComplexMatrix out(rho.dim());
  for (int a = 0; a < da; ++a)
    for (int a2 = 0; a2 < da; ++a2)
      for (int b = 0; b < db; ++b)
        for (int b2 = 0; b2 < db; ++b2) out(db * a + b, db * a2 + b2) = rho(db * a + b2, db * a2 + b);
  return out;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile requires p in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608);
    const double den =
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

ComplexMatrix haar_frame_from_uniforms(std::span<const double> u, int n) {
  if (u.size() != static_cast<std::size_t>(2 * n * n)) {
    throw std::invalid_argument("Haar frame needs 2n^2 coordinates");
  }
  ComplexMatrix a(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const std::size_t k = static_cast<std::size_t>(2 * (r * n + c));
      a(r, c) = Complex(inverse_normal_cdf(u[k]), inverse_normal_cdf(u[k + 1]));
    }

  // Householder QR; q accumulates H_0 H_1 ... so that a_in = q * r.
  ComplexMatrix q = ComplexMatrix::identity(n);
  std::array<Complex, kMaxDim> v{};
  for (int k = 0; k < n - 1; ++k) {
    double norm2 = 0.0;
    for (int r = k; r < n; ++r) norm2 += std::norm(a(r, k));
    const double alpha = std::sqrt(norm2);
    if (alpha == 0.0) continue;
    const Complex x0 = a(k, k);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0);
    for (int r = k; r < n; ++r) v[static_cast<std::size_t>(r)] = a(r, k);
    v[static_cast<std::size_t>(k)] += phase * alpha;
    double vnorm2 = 0.0;
    for (int r = k; r < n; ++r) vnorm2 += std::norm(v[static_cast<std::size_t>(r)]);
    const double scale = 2.0 / vnorm2;

    for (int c = k; c < n; ++c) {
      Complex dot = 0.0;
      for (int r = k; r < n; ++r) dot += std::conj(v[static_cast<std::size_t>(r)]) * a(r, c);
      dot *= scale;
      for (int r = k; r < n; ++r) a(r, c) -= v[static_cast<std::size_t>(r)] * dot;
    }
    for (int r = 0; r < n; ++r) {
      Complex dot = 0.0;
      for (int c = k; c < n; ++c) dot += q(r, c) * v[static_cast<std::size_t>(c)];
      dot *= scale;
      for (int c = k; c < n; ++c) q(r, c) -= dot * std::conj(v[static_cast<std::size_t>(c)]);
    }
  }
  for (int c = 0; c < n; ++c) {
    const Complex rjj = a(c, c);
    const double mag = std::abs(rjj);
    if (mag == 0.0) continue;
    const Complex ph = rjj / mag;
    for (int r = 0; r < n; ++r) q(r, c) *= ph;
  }
  return q;
}

}  // namespace qvol
