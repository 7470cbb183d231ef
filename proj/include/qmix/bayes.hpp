#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "qmix/hermitian.hpp"
#include "qmix/mixture.hpp"
#include "qmix/simplex.hpp"

namespace qmix {

inline constexpr double kPovmTolerance = 1e-10;
inline constexpr double kSupportCutoff = 1e-10;      // relative to the largest eigenvalue
inline constexpr double kIrregularityTolerance = 1e-8;
inline constexpr double kOutcomeCutoff = 1e-12;
inline constexpr double kDroppedWeightTolerance = 1e-10;
inline constexpr double kEigenMergeTolerance = 1e-9;

/// Finite set of PSD operators summing to the identity.
class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<HermitianMatrix> elements, double tol = kPovmTolerance);

  /// The single-element, information-free measurement {I}.
  static Povm trivial(Index d);

  int size() const { return static_cast<int>(elements_.size()); }
  Index dim() const { return elements_.front().dim(); }
  const std::vector<HermitianMatrix>& elements() const { return elements_; }
  const HermitianMatrix& operator[](int k) const { return elements_[k]; }

  /// Outcome probabilities tr(E_k rho).
  Eigen::VectorXd probabilities(const HermitianMatrix& rho) const;

 private:
  std::vector<HermitianMatrix> elements_;
};

/// sigma_lambda = <rho_lambda> + sum_r (lambda_r - lambda-bar_r) D_r.
class EffectiveStateModel {
 public:
  EffectiveStateModel(GeneralizedMixture mix, PriorMoments moments);
  EffectiveStateModel(const GeneralizedMixture& mix, const Prior& prior);

  const GeneralizedMixture& mixture() const { return mix_; }
  const PriorMoments& moments() const { return moments_; }
  const DensityMatrix& mean_state() const { return mean_state_; }
  const std::vector<HermitianMatrix>& directions() const { return directions_; }
  int param_count() const { return mix_.param_count(); }
  Index dim() const { return mix_.dim(); }

  /// Throws ModelError when the result has an eigenvalue below -1e-8,
  /// which can only happen for inconsistent moments.
  DensityMatrix effective_state(const WeightVector& w) const;

 private:
  GeneralizedMixture mix_;
  PriorMoments moments_;
  DensityMatrix mean_state_;
  std::vector<HermitianMatrix> directions_;
};

struct SldSet {
  std::vector<HermitianMatrix> operators;
  CMatrix support_projector;
  Index support_rank = 0;
};

/// Solves (L sigma + sigma L)/2 = d_r in the eigenbasis of sigma, keeping
/// pairs with nu_n + nu_m above the support cutoff. Pairs below the cutoff
/// with non-negligible derivative weight raise SingularModelError.
SldSet sld(const HermitianMatrix& state, std::span<const HermitianMatrix> derivatives);

SldSet sld_at_mean(const EffectiveStateModel& model);

/// H_rs = Re tr(L_r L_s sigma).
Eigen::MatrixXd qfi(const HermitianMatrix& state, const SldSet& slds);
Eigen::MatrixXd qfi_at_mean(const EffectiveStateModel& model);

/// Classical Fisher information sum_k (tr E_k d_r)(tr E_k d_s) / tr(E_k state).
/// Outcomes with probability below 1e-12 are dropped; they must carry no
/// derivative weight, otherwise IrregularOutcomeError.
Eigen::MatrixXd fisher_information(const HermitianMatrix& state, std::span<const HermitianMatrix> derivatives,
                                   const Povm& povm);

struct ErrorReport {
  Eigen::MatrixXd delta;
  Eigen::MatrixXd lambda_cov;
  Eigen::MatrixXd fisher_at_mean;
  Eigen::MatrixXd qfi_at_mean;
  double mse = 0.0;
};

/// Delta = Lambda - F(lambda-bar) for the given measurement.
ErrorReport bayes_error(const EffectiveStateModel& model, const Povm& povm);

/// Posterior mean lambda-bar + v_k / p(k) with v_k,r = tr E_k D_r.
WeightVector optimal_estimator(const EffectiveStateModel& model, const Povm& povm, int outcome);

/// Eigenprojectors of L_a = sum_r a_r L_r on the support of the mean state,
/// one per distinct eigenvalue, plus the projector onto the kernel when the
/// support is not the whole space.
Povm optimal_measurement(const EffectiveStateModel& model, const Eigen::VectorXd& a);

/// Joint eigenprojectors of all SLDs; requires them to commute pairwise.
Povm commuting_sld_measurement(const EffectiveStateModel& model);

/// Largest operator norm of [L_r, L_s] over pairs.
double max_sld_commutator(const SldSet& slds);

/// (M-1)/((M+1)(M+N)) for flat priors over orthogonal components.
double orthogonal_mse(int m, int n);

/// tr Lambda - sum_alpha |Lambda-tilde_alpha|^2 / <c_alpha> for mutually
/// orthogonal components; PreconditionError otherwise.
double orthogonal_mse_general(const GeneralizedMixture& mix, const Prior& prior);

/// Delta_11 for two equal-purity qubit states under the flat prior with the
/// optimal measurement: (5 - r^2 + 2 tr rho1 rho2)/72, which reduces to
/// (2 + tr rho1 rho2)/36 for pure states.
double equal_purity_qubit_mse(const DensityMatrix& rho1, const DensityMatrix& rho2);

}  // namespace qmix
