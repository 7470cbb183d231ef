#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/hermitian.hpp"
#include "qmix/mixture.hpp"
#include "qmix/simplex.hpp"

namespace qmix {

inline constexpr double kInteriorCutoff = 1e-6;
inline constexpr double kProjectionRankTolerance = 1e-10;

/// rho_lambda = sum_r lambda_r rho_r at a fixed interior point, with its
/// partial derivatives d rho / d lambda_r = rho_r.
class PointwiseModel {
 public:
  PointwiseModel(const GeneralizedMixture& mix, const WeightVector& w);

  const WeightVector& weights() const { return w_; }
  const DensityMatrix& state() const { return state_; }
  const std::vector<HermitianMatrix>& partials() const { return partials_; }
  int param_count() const { return w_.size(); }
  Index dim() const { return state_.dim(); }

 private:
  WeightVector w_;
  DensityMatrix state_;
  std::vector<HermitianMatrix> partials_;
};

Eigen::MatrixXd fisher_info(const PointwiseModel& model, const Povm& povm);
SldSet sld_pointwise(const PointwiseModel& model);
Eigen::MatrixXd qfi_pointwise(const PointwiseModel& model);

struct ProjectedMatrix {
  Eigen::MatrixXd full;
  Eigen::MatrixXd projected;       // P_S full P_S
  Eigen::MatrixXd pseudo_inverse;  // inverse on S, zero on u
  double restricted_determinant = 0.0;
};

/// P_S = I - u u^T / M.
Eigen::MatrixXd simplex_projector(int m);

/// Compresses onto the complement S of (1,...,1) and inverts there.
/// RankError when the compression is singular (unidentifiable directions).
ProjectedMatrix project_and_invert(const Eigen::MatrixXd& m, double rel_tol = kProjectionRankTolerance);

/// Error block for the M-1 weights that remain after eliminating `drop`.
Eigen::MatrixXd reduced_block(const Eigen::MatrixXd& pseudo_inverse, int drop);

/// (1/N) * prior average of the projected inverse QFI.
Eigen::MatrixXd asymptotic_bayes_error(const GeneralizedMixture& mix, const Prior& prior, int n,
                                       int resolution = kDefaultResolution);

/// One-parameter QFI of lambda rho_1 + (1 - lambda) rho_2 for qubits:
/// |v|^2 + (v . r_lambda)^2 / (1 - r_lambda^2), v = r_1 - r_2.
double qubit_pair_qfi(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2, double lambda);

/// (1 - c^2) / (lambda (1 - lambda)) for pure states with overlap |c|.
double pure_pair_qfi(double overlap, double lambda);

/// N * Delta to leading order for two pure states under the flat prior.
double pure_pair_asymptotic_coeff(double overlap);

/// N * Delta to leading order for two qubit states under the flat prior,
/// in Bloch-vector form and in trace form.
double qubit_pair_asymptotic_coeff(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2);
double qubit_pair_asymptotic_coeff(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Exact Delta for rho_lambda = lambda diag(1 - eps, eps) + (1 - lambda)|0><0|
/// with N copies and the flat prior: 1/12 - (1/4) sum_k B_k^2 / A_k, with
/// A_k and B_k expanded into Beta moments and summed in exact rational
/// arithmetic. eps is taken as the exact binary rational of the double.
double commuting_exact_error(double eps, int n);

/// Leading-order coefficient 1/(2 eps) - 1/3 of the commuting example.
double commuting_asymptotic_coeff(double eps);

/// Sum over occupation vectors k of length M summing to N of sum_r k_r^2.
std::int64_t occupation_sum_formula(int m, int n);
std::int64_t occupation_sum_enumerate(int m, int n);
/// Formula value, after confirming it equals the enumeration.
std::int64_t occupation_sum_check(int m, int n);

}  // namespace qmix
