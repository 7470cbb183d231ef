#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/mixture.hpp"
#include "qmix/random.hpp"
#include "qmix/simplex.hpp"

namespace qmix {

inline constexpr std::uint64_t kDefaultSeed = 20100101ULL;

/// Inverse-CDF draw over the fixed element order. Probabilities must sum to
/// one within 1e-8, otherwise ModelError.
int sample_index(const Eigen::VectorXd& probs, SplitMix64& rng);
int sample_outcome(const Povm& povm, const HermitianMatrix& state, SplitMix64& rng);

/// Draw from a flat or integer-Dirichlet prior.
Eigen::VectorXd sample_prior(const Prior& prior, SplitMix64& rng);

struct SimConfig {
  int trials = 100000;
  std::uint64_t seed = kDefaultSeed;
  int n_copies = 1;
  std::optional<WeightVector> fixed_lambda;  // otherwise drawn from the prior
};

struct SimResult {
  Eigen::MatrixXd delta;           // mean of (lambda - estimate)(lambda - estimate)^T
  Eigen::MatrixXd standard_error;  // per entry
  double mse = 0.0;
  double mse_se = 0.0;
  int trials = 0;
};

/// Monte Carlo error matrix of the posterior-mean estimator. With
/// n_copies > 1 the POVM acts on the N-copy space.
SimResult simulate_bayes_mse(const GeneralizedMixture& mix, const Prior& prior, const Povm& povm,
                             const SimConfig& cfg);

/// Pure qubit pair (I + cos(theta) sz +- sin(theta) sx) / 2.
std::vector<DensityMatrix> two_step_states(double theta);

/// Closed-form SLD of lambda rho_1 + (1 - lambda) rho_2 for two_step_states.
HermitianMatrix two_step_sld(double theta, double lambda);

struct TwoStepConfig {
  double theta = 0.0;
  int n = 4096;
  int trials = 2000;
  std::uint64_t seed = kDefaultSeed;
};

struct TwoStepResult {
  double target = 0.0;                 // lambda (1 - lambda) / sin^2 theta
  double n_mse = 0.0;                  // N * empirical MSE of the final estimate
  double n_mse_se = 0.0;
  double n_mse_conditional = 0.0;      // N * mean of the exact stage-2 variance given lambda_ini
  double n_mse_conditional_se = 0.0;
  double alpha = 0.0;                  // sqrt(N) * MSE of the rough estimate
  double alpha_se = 0.0;
  int rough_copies = 0;
  double mean_estimate = 0.0;
};

/// Rough estimate from floor(sqrt(N)) copies measured in the sx basis,
/// clipped to [1/N, 1 - 1/N]; the remaining copies are measured in the
/// eigenbasis of the SLD at the rough estimate and inverted by frequency.
TwoStepResult two_step_adaptive(const TwoStepConfig& cfg, double lambda_true);

}  // namespace qmix
