#pragma once

#include <array>
#include <complex>
#include <span>

namespace qvol {

using Complex = std::complex<double>;

/// Largest supported matrix dimension.  Storage is inline so the hot sampling
/// loop never allocates.
inline constexpr int kMaxDim = 6;

/// Dense square complex matrix of runtime dimension n <= kMaxDim, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int n);

  static ComplexMatrix identity(int n);
  static ComplexMatrix diagonal(std::span<const double> values);

  int dim() const { return n_; }
  Complex& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * kMaxDim + c)]; }
  const Complex& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * kMaxDim + c)]; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  ComplexMatrix& operator*=(double s);
  ComplexMatrix& operator+=(const ComplexMatrix& other);

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= s; }

 private:
  int n_ = 0;
  std::array<Complex, kMaxDim * kMaxDim> data_{};
};

/// Largest entry modulus.
double max_abs(const ComplexMatrix& m);
/// max |H - H^dagger|
double hermiticity_defect(const ComplexMatrix& m);
/// max |U^dagger U - I|
double unitarity_defect(const ComplexMatrix& u);
Complex determinant(const ComplexMatrix& m);
/// A * diag(d) * A^dagger for the leading d.size() columns of A.
ComplexMatrix conjugate_diagonal(const ComplexMatrix& a, std::span<const double> d);

/// Bipartition of a dim_a*dim_b space with row index r = dim_b*a + b.
struct TensorSplit {
  int dim_a = 2;
  int dim_b = 3;
  int dim() const { return dim_a * dim_b; }
  friend bool operator==(const TensorSplit&, const TensorSplit&) = default;
};

struct EigenSystem {
  int n = 0;
  std::array<double, kMaxDim> values{};  ///< descending
  ComplexMatrix vectors;                 ///< column k belongs to values[k]

  std::span<const double> spectrum() const { return {values.data(), static_cast<std::size_t>(n)}; }
};

/// Sweep cap of the cyclic Jacobi solver; exceeding it throws
/// std::runtime_error.
inline constexpr int kMaxJacobiSweeps = 64;

EigenSystem hermitian_eigensystem(const ComplexMatrix& h);
/// Eigenvalues only (descending); cheaper than the full system.
std::array<double, kMaxDim> hermitian_eigenvalues(const ComplexMatrix& h);
double min_eigenvalue(const ComplexMatrix& h);

/// Transposes every dim_b x dim_b block of the dim_a x dim_a block array in
/// place, i.e. the transpose on the second tensor factor.
ComplexMatrix partial_transpose(const ComplexMatrix& rho, TensorSplit split);

/// Standard normal quantile (Wichura's AS241, PPND16).
double inverse_normal_cdf(double p);

/// Haar-distributed unitary from 2n^2 coordinates in (0,1): Ginibre matrix via
/// the normal quantile, Householder QR, then Q * diag(r_jj / |r_jj|).
ComplexMatrix haar_frame_from_uniforms(std::span<const double> u, int n);

}  // namespace qvol
