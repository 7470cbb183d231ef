#pragma once

#include <cmath>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/hermitian.hpp"
#include "qmix/random.hpp"
#include "qmix/simplex.hpp"

namespace qmix::testing {

inline double gaussian(SplitMix64& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline CMatrix ginibre(Index rows, Index cols, SplitMix64& rng) {
  CMatrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = {gaussian(rng), gaussian(rng)};
  return g;
}

inline HermitianMatrix random_hermitian(Index d, SplitMix64& rng) {
  const CMatrix g = ginibre(d, d, rng);
  return HermitianMatrix((g + g.adjoint()) * 0.5);
}

/// Random mixed state of the given rank (full rank by default).
inline DensityMatrix random_state(Index d, SplitMix64& rng, Index rank = 0) {
  const CMatrix g = ginibre(d, rank ? rank : d, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(HermitianMatrix((rho + rho.adjoint()) * 0.5));
}

inline DensityMatrix random_pure(Index d, SplitMix64& rng) { return random_state(d, rng, 1); }

/// E_k = S^{-1/2} A_k S^{-1/2} with A_k random PSD of the given rank;
/// needs outcomes * rank >= d so that S is invertible.
inline Povm random_povm(Index d, int outcomes, SplitMix64& rng, Index rank = 1) {
  std::vector<CMatrix> a;
  CMatrix s = CMatrix::Zero(d, d);
  for (int k = 0; k < outcomes; ++k) {
    const CMatrix g = ginibre(d, rank, rng);
    a.push_back(g * g.adjoint());
    s += a.back();
  }
  const auto ed = eig_hermitian(HermitianMatrix((s + s.adjoint()) * 0.5));
  const CMatrix inv_sqrt =
      ed.eigenvectors * ed.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * ed.eigenvectors.adjoint();
  std::vector<HermitianMatrix> elems;
  for (const auto& ak : a) {
    const CMatrix e = inv_sqrt * ak * inv_sqrt;
    elems.emplace_back((e + e.adjoint()) * 0.5);
  }
  return Povm(std::move(elems), 1e-9);
}

inline double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline DensityMatrix ket_state(std::initializer_list<std::complex<double>> amps) {
  CVector v(static_cast<Index>(amps.size()));
  Index i = 0;
  for (auto a : amps) v(i++) = a;
  return DensityMatrix::pure(v.normalized());
}

/// Error matrix by direct averaging over outcomes and the prior:
/// sum_k E[(lambda - est_k)(lambda - est_k)^T p(k | lambda)] with est_k the
/// posterior mean. Every expectation is a polynomial moment of the prior.
struct DirectAverage {
  Eigen::MatrixXd delta;
  std::vector<Eigen::VectorXd> estimates;
};

inline DirectAverage direct_delta(const GeneralizedMixture& mix, const Prior& prior, const Povm& povm) {
  const int m = mix.param_count();
  DirectAverage out;
  out.delta = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < povm.size(); ++k) {
    Polynomial p(m);
    for (int a = 0; a < mix.size(); ++a) {
      p += mix.coefficients()[a] * hs_inner(povm[k], mix.components()[a].hermitian());
    }
    const double pk = prior.expectation(p);
    Eigen::VectorXd first(m);
    Eigen::MatrixXd second(m, m);
    for (int r = 0; r < m; ++r) {
      const Polynomial lr = Polynomial::variable(m, r) * p;
      first(r) = prior.expectation(lr);
      for (int s = 0; s < m; ++s) second(r, s) = prior.expectation(Polynomial::variable(m, s) * lr);
    }
    if (pk <= 0.0) {
      out.estimates.push_back(Eigen::VectorXd::Constant(m, std::nan("")));
      continue;
    }
    const Eigen::VectorXd est = first / pk;
    out.estimates.push_back(est);
    out.delta += second - first * est.transpose() - est * first.transpose() + pk * est * est.transpose();
  }
  return out;
}

}  // namespace qmix::testing
