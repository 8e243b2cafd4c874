#pragma once

// Small linear-algebra helpers shared by the LMI assembly and the conic
// solver: symmetric vectorization and the complex-Hermitian to real-symmetric
// embedding.  Everything is dense Eigen; functions are templated on the
// expression type so they compose without temporaries.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace rcbf {

using Eigen::Index;

inline constexpr Index svec_size(Index n) { return n * (n + 1) / 2; }

// Side length from a packed length, or -1 if not triangular.
inline Index svec_side(Index packed) {
  Index n = static_cast<Index>((std::sqrt(8.0 * static_cast<double>(packed) + 1.0) - 1.0) / 2.0);
  for (Index k = n - 2; k <= n + 2; ++k)
    if (k >= 0 && svec_size(k) == packed) return k;
  return -1;
}

// Packed symmetric vectorization: upper triangle in column-major order with
// off-diagonal entries scaled by sqrt(2), so svec(A).dot(svec(B)) equals the
// Frobenius inner product <A, B> for symmetric A, B.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> svec(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("svec: matrix must be square");
  const Scalar rt2 = static_cast<Scalar>(std::sqrt(2.0));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(svec_size(n));
  Index p = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i)
      v[p++] = (i == j) ? m(i, j) : rt2 * m(i, j);
  return v;
}

// Inverse of svec.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smat(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.cols() != 1) throw std::invalid_argument("smat: expected a column vector");
  const Index n = svec_side(v.rows());
  if (n < 0) throw std::invalid_argument("smat: length is not triangular");
  const Scalar inv_rt2 = static_cast<Scalar>(1.0 / std::sqrt(2.0));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  Index p = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) {
      if (i == j) {
        m(i, j) = v[p];
      } else {
        m(i, j) = inv_rt2 * v[p];
        m(j, i) = m(i, j);
      }
      ++p;
    }
  return m;
}

// Real embedding of a complex matrix: M -> [[Re M, -Im M], [Im M, Re M]].
// For Hermitian M the image is symmetric, M >= 0 iff the image >= 0, and
// every eigenvalue of M appears twice, so traces and Frobenius inner
// products pick up a factor of 2.
template <typename Derived>
Eigen::Matrix<typename Derived::RealScalar, Eigen::Dynamic, Eigen::Dynamic>
complex_to_real(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  const Index r = m.rows(), c = m.cols();
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

// Left inverse of complex_to_real, averaging the two copies of each block.
inline Eigen::MatrixXcd real_to_complex(const Eigen::MatrixXd& m) {
  if (m.rows() % 2 != 0 || m.cols() % 2 != 0)
    throw std::invalid_argument("real_to_complex: dimensions must be even");
  const Index r = m.rows() / 2, c = m.cols() / 2;
  Eigen::MatrixXcd out(r, c);
  out.real() = 0.5 * (m.topLeftCorner(r, c) + m.bottomRightCorner(r, c));
  out.imag() = 0.5 * (m.bottomLeftCorner(r, c) - m.topRightCorner(r, c));
  return out;
}

// Minimum eigenvalue of a symmetric/Hermitian matrix.
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(m.derived(),
                                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Hermitian principal square root; throws if the input has an eigenvalue
// below -tol * ||m||.
template <typename Derived>
typename Derived::PlainObject sqrt_psd(const Eigen::MatrixBase<Derived>& m,
                                       double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(m.derived());
  const auto& ev = es.eigenvalues();
  const double floor = -tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < floor) throw std::invalid_argument("sqrt_psd: matrix is not PSD");
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace rcbf
