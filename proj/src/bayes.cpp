#include "qmix/bayes.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>

namespace qmix {

Povm::Povm(std::vector<HermitianMatrix> elements, double tol) : elements_(std::move(elements)) {
  if (elements_.empty()) throw ArgumentError("POVM needs at least one element");
  const Index d = elements_.front().dim();
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    if (elements_[k].dim() != d) throw ArgumentError("POVM elements must share one dimension");
    const double lo = min_eigenvalue(elements_[k]);
    if (lo < -tol) {
      throw ArgumentError("POVM element " + std::to_string(k) + " has negative eigenvalue " + std::to_string(lo));
    }
    sum += elements_[k].matrix();
  }
  const double dev = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > tol) throw ArgumentError("POVM elements sum to the identity only within " + std::to_string(dev));
}

Povm Povm::trivial(Index d) { return Povm({HermitianMatrix::identity(d)}); }

Eigen::VectorXd Povm::probabilities(const HermitianMatrix& rho) const {
  if (rho.dim() != dim()) throw ArgumentError("state and POVM dimensions differ");
  Eigen::VectorXd p(size());
  for (int k = 0; k < size(); ++k) p(k) = hs_inner(elements_[k], rho);
  return p;
}

// ---------------------------------------------------------------------------

EffectiveStateModel::EffectiveStateModel(GeneralizedMixture mix, PriorMoments moments)
    : mix_(std::move(mix)), moments_(std::move(moments)) {
  const int m = mix_.param_count();
  if (moments_.mean.size() != m || static_cast<int>(moments_.cross.size()) != mix_.size() ||
      moments_.coefficient_means.size() != mix_.size()) {
    throw ArgumentError("prior moments do not match the mixture");
  }
  const auto& comps = mix_.components();
  const HermitianMatrix mean = weighted_sum(comps, moments_.coefficient_means);
  if (min_eigenvalue(mean) < -1e-8) throw ModelError("mean state is not positive semidefinite");
  mean_state_ = DensityMatrix(mean, 1e-8);
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd w(mix_.size());
    for (int a = 0; a < mix_.size(); ++a) w(a) = moments_.cross[a](r);
    directions_.push_back(weighted_sum(comps, w));
  }
}

EffectiveStateModel::EffectiveStateModel(const GeneralizedMixture& mix, const Prior& prior)
    : EffectiveStateModel(mix, prior_moments(prior, mix)) {}

DensityMatrix EffectiveStateModel::effective_state(const WeightVector& w) const {
  if (w.size() != param_count()) throw ArgumentError("weight vector length does not match the model");
  HermitianMatrix s = mean_state_.hermitian();
  for (int r = 0; r < param_count(); ++r) s += directions_[r] * (w[r] - moments_.mean(r));
  const double lo = min_eigenvalue(s);
  if (lo < -1e-8) {
    throw ModelError("effective state has eigenvalue " + std::to_string(lo) + "; prior moments are inconsistent");
  }
  return DensityMatrix(s, 1e-8);
}

// ---------------------------------------------------------------------------

SldSet sld(const HermitianMatrix& state, std::span<const HermitianMatrix> derivatives) {
  const auto ed = eig_hermitian(state);
  const Eigen::VectorXd& nu = ed.eigenvalues;
  const CMatrix& v = ed.eigenvectors;
  const Index d = state.dim();
  const double cutoff = kSupportCutoff * std::max(nu.maxCoeff(), 0.0);

  SldSet out;
  out.support_projector = CMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    if (nu(i) > cutoff) {
      out.support_projector += v.col(i) * v.col(i).adjoint();
      ++out.support_rank;
    }
  }
  for (std::size_t r = 0; r < derivatives.size(); ++r) {
    const CMatrix dt = v.adjoint() * derivatives[r].matrix() * v;
    CMatrix lt = CMatrix::Zero(d, d);
    for (Index n = 0; n < d; ++n) {
      for (Index m = 0; m < d; ++m) {
        const double denom = nu(n) + nu(m);
        if (denom > cutoff) {
          lt(n, m) = 2.0 * dt(n, m) / denom;
        } else if (std::abs(dt(n, m)) > kIrregularityTolerance) {
          throw SingularModelError("derivative " + std::to_string(r) + " has weight " +
                                   std::to_string(std::abs(dt(n, m))) + " on kernel pair (" + std::to_string(n) +
                                   ", " + std::to_string(m) + ")");
        }
      }
    }
    out.operators.emplace_back(v * lt * v.adjoint());
  }
  return out;
}

SldSet sld_at_mean(const EffectiveStateModel& model) {
  return sld(model.mean_state().hermitian(), model.directions());
}

Eigen::MatrixXd qfi(const HermitianMatrix& state, const SldSet& slds) {
  const Index m = static_cast<Index>(slds.operators.size());
  Eigen::MatrixXd h(m, m);
  for (Index r = 0; r < m; ++r) {
    const CMatrix lrs = slds.operators[r].matrix() * state.matrix();
    for (Index s = r; s < m; ++s) {
      // tr(L_s L_r sigma) is the complex conjugate of tr(L_r L_s sigma).
      h(r, s) = h(s, r) = (slds.operators[s].matrix().transpose().cwiseProduct(lrs)).sum().real();
    }
  }
  return h;
}

Eigen::MatrixXd qfi_at_mean(const EffectiveStateModel& model) {
  return qfi(model.mean_state().hermitian(), sld_at_mean(model));
}

namespace {

// Outcome weights v_k,r and probabilities p_k with the drop rule applied.
struct OutcomeTable {
  std::vector<int> kept;
  Eigen::MatrixXd v;  // kept outcomes x parameters
  Eigen::VectorXd p;
};

OutcomeTable outcome_table(const HermitianMatrix& state, std::span<const HermitianMatrix> derivatives,
                           const Povm& povm) {
  if (povm.dim() != state.dim()) throw ArgumentError("POVM dimension does not match the state");
  const Index m = static_cast<Index>(derivatives.size());
  OutcomeTable t;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> ps;
  for (int k = 0; k < povm.size(); ++k) {
    const double p = hs_inner(povm[k], state);
    Eigen::VectorXd row(m);
    for (Index r = 0; r < m; ++r) row(r) = hs_inner(povm[k], derivatives[r]);
    if (p < kOutcomeCutoff) {
      if (row.size() && row.cwiseAbs().maxCoeff() >= kDroppedWeightTolerance) {
        throw IrregularOutcomeError("outcome " + std::to_string(k) + " has probability " + std::to_string(p) +
                                    " but derivative weight " + std::to_string(row.cwiseAbs().maxCoeff()));
      }
      continue;
    }
    t.kept.push_back(k);
    rows.push_back(row);
    ps.push_back(p);
  }
  t.v.resize(static_cast<Index>(rows.size()), m);
  t.p.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.v.row(static_cast<Index>(i)) = rows[i].transpose();
    t.p(static_cast<Index>(i)) = ps[i];
  }
  return t;
}

}  // namespace

Eigen::MatrixXd fisher_information(const HermitianMatrix& state, std::span<const HermitianMatrix> derivatives,
                                   const Povm& povm) {
  const OutcomeTable t = outcome_table(state, derivatives, povm);
  return t.v.transpose() * t.p.cwiseInverse().asDiagonal() * t.v;
}

ErrorReport bayes_error(const EffectiveStateModel& model, const Povm& povm) {
  ErrorReport rep;
  rep.lambda_cov = model.moments().covariance;
  rep.fisher_at_mean = fisher_information(model.mean_state().hermitian(), model.directions(), povm);
  rep.qfi_at_mean = qfi_at_mean(model);
  rep.delta = rep.lambda_cov - rep.fisher_at_mean;
  rep.mse = rep.delta.trace();
  return rep;
}

WeightVector optimal_estimator(const EffectiveStateModel& model, const Povm& povm, int outcome) {
  if (outcome < 0 || outcome >= povm.size()) throw ArgumentError("outcome index out of range");
  const double p = hs_inner(povm[outcome], model.mean_state().hermitian());
  if (p < kOutcomeCutoff) {
    throw IrregularOutcomeError("outcome " + std::to_string(outcome) + " has zero prior probability");
  }
  Eigen::VectorXd est = model.moments().mean;
  for (int r = 0; r < model.param_count(); ++r) est(r) += hs_inner(povm[outcome], model.directions()[r]) / p;
  return WeightVector(est, 1e-9);
}

// ---------------------------------------------------------------------------

namespace {

// Orthonormal basis (columns) of the range of a projector.
CMatrix range_basis(const CMatrix& proj) {
  const auto ed = eig_hermitian(HermitianMatrix(proj));
  std::vector<Index> cols;
  for (Index i = 0; i < proj.rows(); ++i) {
    if (ed.eigenvalues(i) > 0.5) cols.push_back(i);
  }
  CMatrix b(proj.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) b.col(static_cast<Index>(j)) = ed.eigenvectors.col(cols[j]);
  return b;
}

// Splits span(basis) into eigenspaces of the compression of op, merging
// eigenvalues closer than the merge tolerance.
std::vector<CMatrix> split_by(const CMatrix& basis, const CMatrix& op, double scale) {
  const CMatrix comp = basis.adjoint() * op * basis;
  const auto ed = eig_hermitian(HermitianMatrix((comp + comp.adjoint()) * 0.5));
  std::vector<CMatrix> out;
  const Index n = basis.cols();
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i == n || ed.eigenvalues(i) - ed.eigenvalues(i - 1) > kEigenMergeTolerance * scale) {
      out.push_back(basis * ed.eigenvectors.middleCols(start, i - start));
      start = i;
    }
  }
  return out;
}

Povm assemble(const std::vector<CMatrix>& blocks, const CMatrix& support, Index d) {
  std::vector<HermitianMatrix> elems;
  for (const auto& b : blocks) elems.emplace_back(b * b.adjoint());
  const CMatrix rest = CMatrix::Identity(d, d) - support;
  if (rest.norm() > 1e-9) elems.emplace_back(rest);
  return Povm(std::move(elems), 1e-9);
}

}  // namespace

Povm optimal_measurement(const EffectiveStateModel& model, const Eigen::VectorXd& a) {
  if (a.size() != model.param_count()) throw ArgumentError("direction length does not match the model");
  const SldSet s = sld_at_mean(model);
  CMatrix la = CMatrix::Zero(model.dim(), model.dim());
  for (int r = 0; r < model.param_count(); ++r) la += a(r) * s.operators[r].matrix();
  const double scale = la.cwiseAbs().maxCoeff();
  if (scale < 1e-12) throw NoInformationError("SLD along the requested direction vanishes");
  const CMatrix support = range_basis(s.support_projector);
  return assemble(split_by(support, la, std::max(1.0, scale)), s.support_projector, model.dim());
}

double max_sld_commutator(const SldSet& slds) {
  double worst = 0.0;
  for (std::size_t r = 0; r < slds.operators.size(); ++r) {
    for (std::size_t s = r + 1; s < slds.operators.size(); ++s) {
      const CMatrix& a = slds.operators[r].matrix();
      const CMatrix& b = slds.operators[s].matrix();
      const CMatrix c = a * b - b * a;
      // i[A, B] is Hermitian.
      const CMatrix h = std::complex<double>(0, 1) * c;
      worst = std::max(worst, operator_norm(HermitianMatrix((h + h.adjoint()) * 0.5)));
    }
  }
  return worst;
}

Povm commuting_sld_measurement(const EffectiveStateModel& model) {
  const SldSet s = sld_at_mean(model);
  const double comm = max_sld_commutator(s);
  if (comm > 1e-8) {
    throw PreconditionError("SLDs do not commute (commutator norm " + std::to_string(comm) + ")");
  }
  std::vector<CMatrix> blocks{range_basis(s.support_projector)};
  for (const auto& l : s.operators) {
    const double scale = std::max(1.0, l.matrix().cwiseAbs().maxCoeff());
    std::vector<CMatrix> refined;
    for (const auto& b : blocks) {
      auto parts = split_by(b, l.matrix(), scale);
      refined.insert(refined.end(), parts.begin(), parts.end());
    }
    blocks = std::move(refined);
  }
  return assemble(blocks, s.support_projector, model.dim());
}

// ---------------------------------------------------------------------------

double orthogonal_mse(int m, int n) {
  if (m < 2 || n < 1) throw ArgumentError("orthogonal_mse needs M >= 2 and N >= 1");
  namespace mp = boost::multiprecision;
  return static_cast<double>(mp::cpp_rational(m - 1, static_cast<long long>(m + 1) * (m + n)));
}

double orthogonal_mse_general(const GeneralizedMixture& mix, const Prior& prior) {
  const auto& c = mix.components();
  for (std::size_t a = 0; a < c.size(); ++a) {
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      const double overlap = (c[a].matrix() * c[b].matrix()).norm();
      if (overlap > 1e-10) {
        throw PreconditionError("components " + std::to_string(a) + " and " + std::to_string(b) +
                                " are not orthogonal (|rho_a rho_b| = " + std::to_string(overlap) + ")");
      }
    }
  }
  const PriorMoments pm = prior_moments(prior, mix);
  double e = pm.covariance.trace();
  for (int a = 0; a < mix.size(); ++a) {
    if (pm.coefficient_means(a) > 0.0) e -= pm.cross[a].squaredNorm() / pm.coefficient_means(a);
  }
  return e;
}

double equal_purity_qubit_mse(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != 2 || rho2.dim() != 2) throw ArgumentError("closed form applies to qubits only");
  const double p1 = rho1.purity();
  const double p2 = rho2.purity();
  if (std::abs(p1 - p2) > 1e-9) throw PreconditionError("closed form needs states of equal purity");
  const double r2 = 2.0 * p1 - 1.0;
  return (5.0 - r2 + 2.0 * hs_inner(rho1.hermitian(), rho2.hermitian())) / 72.0;
}

}  // namespace qmix
