#include "qmix/simulation.hpp"

#include <cmath>
#include <string>

namespace qmix {

int sample_index(const Eigen::VectorXd& probs, SplitMix64& rng) {
  const double total = probs.sum();
  if (std::abs(total - 1.0) > 1e-8) {
    throw ModelError("outcome probabilities sum to " + std::to_string(total));
  }
  const double u = rng.uniform();
  double acc = 0.0;
  const Index n = probs.size();
  for (Index k = 0; k < n; ++k) {
    acc += std::max(probs(k), 0.0);
    if (u < acc) return static_cast<int>(k);
  }
  // Round-off left u above the last partial sum: take the last outcome
  // with positive probability.
  for (Index k = n - 1; k >= 0; --k) {
    if (probs(k) > 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(n - 1);
}

int sample_outcome(const Povm& povm, const HermitianMatrix& state, SplitMix64& rng) {
  return sample_index(povm.probabilities(state), rng);
}

Eigen::VectorXd sample_prior(const Prior& prior, SplitMix64& rng) {
  switch (prior.kind()) {
    case Prior::Kind::flat:
      return sample_flat_simplex(prior.size(), rng);
    case Prior::Kind::dirichlet: {
      // Gamma(a) with integer a is a sum of a unit exponentials.
      Eigen::VectorXd g(prior.size());
      for (int r = 0; r < prior.size(); ++r) {
        double s = 0.0;
        for (int i = 0; i < prior.alpha()[r]; ++i) s -= std::log(rng.uniform_open());
        g(r) = s;
      }
      return g / g.sum();
    }
    case Prior::Kind::custom:
      break;
  }
  throw PreconditionError("sampling needs a flat or Dirichlet prior");
}

SimResult simulate_bayes_mse(const GeneralizedMixture& mix, const Prior& prior, const Povm& povm,
                             const SimConfig& cfg) {
  if (cfg.trials < 1) throw ArgumentError("simulation needs at least one trial");
  if (cfg.n_copies < 1) throw ArgumentError("number of copies must be positive");
  const GeneralizedMixture model_mix = cfg.n_copies == 1 ? mix : multicopy_expand(mix, cfg.n_copies);
  if (povm.dim() != model_mix.dim()) {
    throw ArgumentError("POVM acts on dimension " + std::to_string(povm.dim()) + " but the " +
                        std::to_string(cfg.n_copies) + "-copy state has dimension " +
                        std::to_string(model_mix.dim()));
  }
  const EffectiveStateModel model(model_mix, prior);
  const int m = mix.param_count();
  const int na = model_mix.size();
  const int nk = povm.size();

  // T(k, alpha) = tr E_k rho_alpha, and the estimate for every outcome.
  Eigen::MatrixXd t(nk, na);
  for (int k = 0; k < nk; ++k) {
    for (int a = 0; a < na; ++a) t(k, a) = hs_inner(povm[k], model_mix.components()[a].hermitian());
  }
  std::vector<Eigen::VectorXd> estimates(nk);
  for (int k = 0; k < nk; ++k) {
    const double p = hs_inner(povm[k], model.mean_state().hermitian());
    estimates[k] = p < kOutcomeCutoff ? model.moments().mean : optimal_estimator(model, povm, k).values();
  }

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(m, m);
  double tr_sum = 0.0, tr_sq = 0.0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    SplitMix64 rng(cfg.seed, static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd lam = cfg.fixed_lambda ? cfg.fixed_lambda->values() : sample_prior(prior, rng);
    const Eigen::VectorXd c = model_mix.coefficient_values(WeightVector(lam, 1e-9));
    const int k = sample_index(t * c, rng);
    const Eigen::VectorXd e = lam - estimates[k];
    const Eigen::MatrixXd outer = e * e.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
    const double sq = e.squaredNorm();
    tr_sum += sq;
    tr_sq += sq * sq;
  }
  const double n = cfg.trials;
  SimResult res;
  res.trials = cfg.trials;
  res.delta = sum / n;
  const Eigen::MatrixXd var = (sum_sq / n - res.delta.cwiseProduct(res.delta)) * (n / std::max(1.0, n - 1.0));
  res.standard_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  res.mse = tr_sum / n;
  res.mse_se = std::sqrt(std::max(0.0, (tr_sq / n - res.mse * res.mse) * n / std::max(1.0, n - 1.0)) / n);
  return res;
}

// ---------------------------------------------------------------------------

std::vector<DensityMatrix> two_step_states(double theta) {
  const Eigen::Vector3d r1(std::sin(theta), 0.0, std::cos(theta));
  const Eigen::Vector3d r2(-std::sin(theta), 0.0, std::cos(theta));
  return {bloch_to_density(r1), bloch_to_density(r2)};
}

HermitianMatrix two_step_sld(double theta, double lambda) {
  HermitianMatrix a = HermitianMatrix::identity(2) - pauli(2) * std::cos(theta);
  HermitianMatrix l = a * (1.0 - 2.0 * lambda) + pauli(0) * std::sin(theta);
  return l * (1.0 / (2.0 * lambda * (1.0 - lambda)));
}

namespace {

int count_successes(int n, double p, SplitMix64& rng) {
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    if (rng.uniform() < p) ++hits;
  }
  return hits;
}

}  // namespace

TwoStepResult two_step_adaptive(const TwoStepConfig& cfg, double lambda_true) {
  const double s = std::sin(cfg.theta);
  const double c = std::cos(cfg.theta);
  if (std::abs(s) < 1e-12) throw ArgumentError("sin(theta) = 0: the two states coincide");
  if (cfg.n < 16) throw ArgumentError("two-step protocol needs N >= 16");
  if (!(lambda_true > 0.0 && lambda_true < 1.0)) throw ArgumentError("lambda must lie strictly inside (0, 1)");
  if (cfg.trials < 2) throw ArgumentError("two-step protocol needs at least two trials");

  const int n1 = static_cast<int>(std::floor(std::sqrt(static_cast<double>(cfg.n))));
  const int n2 = cfg.n - n1;
  const double delta = 1.0 / cfg.n;
  // Stage 1: P(+x) = (1 + (2 lambda - 1) sin theta) / 2.
  const double p_rough = 0.5 * (1.0 + (2.0 * lambda_true - 1.0) * s);

  double se_sum = 0.0, se_sq = 0.0, cond_sum = 0.0, cond_sq = 0.0, a_sum = 0.0, a_sq = 0.0, est_sum = 0.0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    SplitMix64 rng(cfg.seed, static_cast<std::uint64_t>(trial));
    const double f1 = static_cast<double>(count_successes(n1, p_rough, rng)) / n1;
    double ini = 0.5 * ((2.0 * f1 - 1.0) / s + 1.0);
    ini = std::clamp(ini, delta, 1.0 - delta);

    // Stage 2: the SLD at ini is proportional to n . sigma plus identity,
    // n = (sin theta, 0, -(1 - 2 ini) cos theta); outcome + has
    // probability (1 + r_lambda . n / |n|) / 2, affine in lambda.
    const Eigen::Vector3d dir(s, 0.0, -(1.0 - 2.0 * ini) * c);
    const Eigen::Vector3d u = dir / dir.norm();
    const double a0 = 0.5 * (1.0 + (-s) * u(0) + c * u(2));  // p+ at lambda = 0
    const double b = s * u(0);                                 // slope d p+ / d lambda
    const double p_fine = a0 + b * lambda_true;
    const double f2 = static_cast<double>(count_successes(n2, p_fine, rng)) / n2;
    const double est = (f2 - a0) / b;

    const double err2 = (est - lambda_true) * (est - lambda_true);
    const double cond = p_fine * (1.0 - p_fine) / (n2 * b * b);
    const double rough2 = (ini - lambda_true) * (ini - lambda_true);
    se_sum += err2;
    se_sq += err2 * err2;
    cond_sum += cond;
    cond_sq += cond * cond;
    a_sum += rough2;
    a_sq += rough2 * rough2;
    est_sum += est;
  }
  const double n = cfg.trials;
  auto mean_se = [n](double sum, double sq) {
    const double mean = sum / n;
    const double var = std::max(0.0, (sq / n - mean * mean) * n / (n - 1.0));
    return std::pair{mean, std::sqrt(var / n)};
  };
  TwoStepResult res;
  res.target = lambda_true * (1.0 - lambda_true) / (s * s);
  res.rough_copies = n1;
  const auto [mse, mse_se] = mean_se(se_sum, se_sq);
  const auto [cmse, cmse_se] = mean_se(cond_sum, cond_sq);
  const auto [rmse, rmse_se] = mean_se(a_sum, a_sq);
  res.n_mse = cfg.n * mse;
  res.n_mse_se = cfg.n * mse_se;
  res.n_mse_conditional = cfg.n * cmse;
  res.n_mse_conditional_se = cfg.n * cmse_se;
  const double root = std::sqrt(static_cast<double>(cfg.n));
  res.alpha = root * rmse;
  res.alpha_se = root * rmse_se;
  res.mean_estimate = est_sum / n;
  return res;
}

}  // namespace qmix
