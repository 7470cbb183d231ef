#pragma once

// Dense complex Hermitian algebra used by every other module. Everything here
// is templated on the real scalar type; the rest of the library instantiates
// it with double through the aliases at the bottom of the file.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qmix/errors.hpp"

namespace qmix {

using Index = Eigen::Index;

template <typename Real>
using CMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrixT = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kDensityTolerance = 1e-10;
inline constexpr Index kDefaultDimensionCap = 4096;

/// Largest composite dimension tensor products may produce. Overridden by
/// the QMIX_DIM_CAP environment variable.
inline Index dimension_cap() {
  if (const char* env = std::getenv("QMIX_DIM_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
  }
  return kDefaultDimensionCap;
}

template <typename Real>
class BasicHermitian {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = CMatrixT<Real>;

  BasicHermitian() = default;

  /// Accepts m if it is Hermitian up to round-off and stores (m + m†)/2.
  explicit BasicHermitian(const Matrix& m) : m_(m) {
    if (m.rows() != m.cols()) {
      throw ArgumentError("Hermitian matrix must be square, got " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()));
    }
    const Real scale = std::max<Real>(Real(1), m.cwiseAbs().maxCoeff());
    const Real asym = m.rows() == 0 ? Real(0) : (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > Real(kHermitianTolerance) * scale) {
      throw ArgumentError("matrix is not Hermitian (asymmetry " + std::to_string(double(asym)) +
                          ")");
    }
    m_ = (m + m.adjoint()) * Real(0.5);
  }

  static BasicHermitian identity(Index d) { return BasicHermitian(Matrix::Identity(d, d)); }
  static BasicHermitian zero(Index d) { return BasicHermitian(Matrix::Zero(d, d)); }

  /// Projector |v><v| (v need not be normalized).
  static BasicHermitian outer(const CVectorT<Real>& v) { return BasicHermitian(v * v.adjoint()); }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  Real trace() const { return m_.trace().real(); }

  BasicHermitian& operator+=(const BasicHermitian& o) {
    m_ += o.m_;
    return *this;
  }
  BasicHermitian& operator-=(const BasicHermitian& o) {
    m_ -= o.m_;
    return *this;
  }
  BasicHermitian& operator*=(Real s) {
    m_ *= s;
    return *this;
  }

  friend BasicHermitian operator+(BasicHermitian a, const BasicHermitian& b) { return a += b; }
  friend BasicHermitian operator-(BasicHermitian a, const BasicHermitian& b) { return a -= b; }
  friend BasicHermitian operator*(BasicHermitian a, Real s) { return a *= s; }
  friend BasicHermitian operator*(Real s, BasicHermitian a) { return a *= s; }
  friend BasicHermitian operator-(BasicHermitian a) { return a *= Real(-1); }

 private:
  Matrix m_;
};

template <typename Real>
struct BasicEigendecomposition {
  RVectorT<Real> eigenvalues;    // ascending
  CMatrixT<Real> eigenvectors;   // orthonormal columns
};

/// Hermitian eigendecomposition (tridiagonalization followed by implicit QL).
template <typename Real>
BasicEigendecomposition<Real> eig_hermitian(const BasicHermitian<Real>& m) {
  Eigen::SelfAdjointEigenSolver<CMatrixT<Real>> solver(m.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge for dimension " +
                         std::to_string(m.dim()));
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Real>
RVectorT<Real> eigenvalues(const BasicHermitian<Real>& m) {
  Eigen::SelfAdjointEigenSolver<CMatrixT<Real>> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge for dimension " +
                         std::to_string(m.dim()));
  }
  return solver.eigenvalues();
}

template <typename Real>
Real min_eigenvalue(const BasicHermitian<Real>& m) {
  return eigenvalues(m).minCoeff();
}

/// Sum of absolute eigenvalues.
template <typename Real>
Real trace_norm(const BasicHermitian<Real>& m) {
  return eigenvalues(m).cwiseAbs().sum();
}

/// Largest absolute eigenvalue.
template <typename Real>
Real operator_norm(const BasicHermitian<Real>& m) {
  return eigenvalues(m).cwiseAbs().maxCoeff();
}

/// Re tr(a b), the Hilbert-Schmidt inner product.
template <typename Real>
Real hs_inner(const BasicHermitian<Real>& a, const BasicHermitian<Real>& b) {
  return (a.matrix().conjugate().cwiseProduct(b.matrix())).sum().real();
}

template <typename Real>
Real frobenius_distance(const BasicHermitian<Real>& a, const BasicHermitian<Real>& b) {
  return (a.matrix() - b.matrix()).norm();
}

template <typename Real>
CMatrixT<Real> kron(const CMatrixT<Real>& a, const CMatrixT<Real>& b) {
  CMatrixT<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline void check_composite_dimension(long double dim, Index cap) {
  if (dim > static_cast<long double>(cap)) {
    throw SizeError("composite dimension " + std::to_string(static_cast<double>(dim)) +
                    " exceeds the cap of " + std::to_string(cap));
  }
}

template <typename Real>
BasicHermitian<Real> tensor_product(const BasicHermitian<Real>& a, const BasicHermitian<Real>& b,
                                    Index cap = dimension_cap()) {
  check_composite_dimension(static_cast<long double>(a.dim()) * b.dim(), cap);
  return BasicHermitian<Real>(kron<Real>(a.matrix(), b.matrix()));
}

template <typename Real>
class BasicDensityMatrix {
 public:
  BasicDensityMatrix() = default;

  explicit BasicDensityMatrix(BasicHermitian<Real> h, Real tol = Real(kDensityTolerance))
      : h_(std::move(h)) {
    if (std::abs(h_.trace() - Real(1)) > tol) {
      throw ArgumentError("density matrix trace " + std::to_string(double(h_.trace())) +
                          " differs from 1");
    }
    const Real lo = min_eigenvalue(h_);
    if (lo < -tol) {
      throw ArgumentError("density matrix has negative eigenvalue " + std::to_string(double(lo)));
    }
  }

  explicit BasicDensityMatrix(const CMatrixT<Real>& m, Real tol = Real(kDensityTolerance))
      : BasicDensityMatrix(BasicHermitian<Real>(m), tol) {}

  static BasicDensityMatrix pure(const CVectorT<Real>& psi) {
    const Real n = psi.norm();
    if (n == Real(0)) throw ArgumentError("pure state vector is zero");
    return BasicDensityMatrix(BasicHermitian<Real>::outer(psi / n));
  }

  static BasicDensityMatrix maximally_mixed(Index d) {
    return BasicDensityMatrix(BasicHermitian<Real>::identity(d) * (Real(1) / Real(d)));
  }

  Index dim() const { return h_.dim(); }
  const BasicHermitian<Real>& hermitian() const { return h_; }
  const CMatrixT<Real>& matrix() const { return h_.matrix(); }
  operator const BasicHermitian<Real>&() const { return h_; }

  Real purity() const { return hs_inner(h_, h_); }

 private:
  BasicHermitian<Real> h_;
};

/// Uniform average over all orderings of the tensor factors. Orderings that
/// coincide because parts are equal are enumerated once; the average over
/// distinct orderings equals the average over all N! permutations.
template <typename Real>
BasicDensityMatrix<Real> symmetrize(std::span<const BasicDensityMatrix<Real>> parts,
                                    Index cap = dimension_cap()) {
  if (parts.empty()) throw ArgumentError("symmetrize needs at least one part");
  const Index d = parts.front().dim();
  long double total = 1;
  for (const auto& p : parts) {
    if (p.dim() != d) throw ArgumentError("symmetrize parts must share one dimension");
    total *= static_cast<long double>(d);
  }
  check_composite_dimension(total, cap);

  // Label equal parts identically so that std::next_permutation visits each
  // distinct arrangement exactly once.
  std::vector<int> labels(parts.size());
  std::vector<std::size_t> representative;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    int label = -1;
    for (std::size_t l = 0; l < representative.size(); ++l) {
      if (parts[representative[l]].matrix() == parts[i].matrix()) {
        label = static_cast<int>(l);
        break;
      }
    }
    if (label < 0) {
      label = static_cast<int>(representative.size());
      representative.push_back(i);
    }
    labels[i] = label;
  }
  std::sort(labels.begin(), labels.end());

  const Index n = static_cast<Index>(total);
  CMatrixT<Real> acc = CMatrixT<Real>::Zero(n, n);
  long long count = 0;
  do {
    CMatrixT<Real> term = parts[representative[labels[0]]].matrix();
    for (std::size_t i = 1; i < labels.size(); ++i) {
      term = kron<Real>(term, parts[representative[labels[i]]].matrix());
    }
    acc += term;
    ++count;
  } while (std::next_permutation(labels.begin(), labels.end()));
  acc /= Real(count);
  return BasicDensityMatrix<Real>(BasicHermitian<Real>(acc));
}

template <typename Real>
BasicDensityMatrix<Real> symmetrize(const std::vector<BasicDensityMatrix<Real>>& parts,
                                    Index cap = dimension_cap()) {
  return symmetrize<Real>(std::span<const BasicDensityMatrix<Real>>(parts), cap);
}

/// Principal square root of a positive semidefinite real symmetric matrix.
template <typename Real>
RMatrixT<Real> psd_sqrt(const RMatrixT<Real>& g) {
  Eigen::SelfAdjointEigenSolver<RMatrixT<Real>> solver(g);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed in psd_sqrt");
  const RVectorT<Real> w = solver.eigenvalues().cwiseMax(Real(0)).cwiseSqrt();
  return solver.eigenvectors() * w.asDiagonal() * solver.eigenvectors().transpose();
}

using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;
using HermitianMatrix = BasicHermitian<double>;
using DensityMatrix = BasicDensityMatrix<double>;
using Eigendecomposition = BasicEigendecomposition<double>;

/// Pauli matrices, index 0..2 = x, y, z.
inline HermitianMatrix pauli(int axis) {
  using namespace std::complex_literals;
  CMatrix m(2, 2);
  switch (axis) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, -1i, 1i, 0; break;
    case 2: m << 1, 0, 0, -1; break;
    default: throw ArgumentError("Pauli axis must be 0, 1 or 2");
  }
  return HermitianMatrix(m);
}

}  // namespace qmix
