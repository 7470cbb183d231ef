#include "qmix/holevo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmix/random.hpp"

namespace qmix {

using cd = std::complex<double>;

ParametricModel eliminate(const PointwiseModel& model, int drop) {
  const int m = model.param_count();
  if (drop < 0) drop = m - 1;
  if (drop >= m) throw ArgumentError("elimination index out of range");
  ParametricModel out;
  out.state = model.state().hermitian();
  for (int r = 0; r < m; ++r) {
    if (r != drop) out.partials.push_back(model.partials()[r] - model.partials()[drop]);
  }
  return out;
}

std::vector<HermitianMatrix> hermitian_basis(Index d) {
  std::vector<HermitianMatrix> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      CMatrix a = CMatrix::Zero(d, d);
      a(j, k) = a(k, j) = s;
      out.emplace_back(a);
      CMatrix b = CMatrix::Zero(d, d);
      b(j, k) = cd(0, -s);
      b(k, j) = cd(0, s);
      out.emplace_back(b);
    }
  }
  for (Index l = 1; l < d; ++l) {
    CMatrix c = CMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index i = 0; i < l; ++i) c(i, i) = norm;
    c(l, l) = -static_cast<double>(l) * norm;
    out.emplace_back(c);
  }
  out.emplace_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  return out;
}

std::vector<HermitianMatrix> XFamily::operators(const std::vector<HermitianMatrix>& basis,
                                                const Eigen::MatrixXd& coeffs) const {
  std::vector<HermitianMatrix> xs;
  const Index d = basis.front().dim();
  for (Index s = 0; s < coeffs.cols(); ++s) {
    CMatrix x = CMatrix::Zero(d, d);
    for (Index j = 0; j < coeffs.rows(); ++j) x += coeffs(j, s) * basis[j].matrix();
    xs.emplace_back(x);
  }
  return xs;
}

XFamily solve_constraints(const ParametricModel& model) {
  const int p = model.param_count();
  const auto basis = hermitian_basis(model.dim());
  const Index nb = static_cast<Index>(basis.size());
  Eigen::MatrixXd c(p + 1, nb);
  for (Index j = 0; j < nb; ++j) {
    c(0, j) = hs_inner(model.state, basis[j]);
    for (int r = 0; r < p; ++r) c(r + 1, j) = hs_inner(model.partials[r], basis[j]);
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p + 1, p);
  rhs.bottomRows(p).setIdentity();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  XFamily fam;
  fam.particular = svd.solve(rhs);
  const double residual = (c * fam.particular - rhs).cwiseAbs().maxCoeff();
  if (residual > kConstraintTolerance) {
    throw RankError("constraints on X are inconsistent (residual " + std::to_string(residual) +
                    "); the model is unidentifiable, reparametrize first");
  }
  const Index rank = svd.rank();
  fam.null_basis = svd.matrixV().rightCols(nb - rank);
  fam.free_dim = p * static_cast<int>(nb - rank);
  return fam;
}

XFamily solve_constraints(const PointwiseModel& model, int drop) { return solve_constraints(eliminate(model, drop)); }

double constraint_residual(const ParametricModel& model, const std::vector<HermitianMatrix>& xs) {
  double worst = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    worst = std::max(worst, std::abs(hs_inner(model.state, xs[s])));
    for (int r = 0; r < model.param_count(); ++r) {
      const double target = static_cast<int>(s) == r ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(hs_inner(model.partials[r], xs[s]) - target));
    }
  }
  return worst;
}

ZMatrix z_matrix(const HermitianMatrix& state, const std::vector<HermitianMatrix>& xs) {
  const Index p = static_cast<Index>(xs.size());
  ZMatrix z{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
  for (Index r = 0; r < p; ++r) {
    if (xs[r].dim() != state.dim()) throw ArgumentError("X operator dimension does not match the state");
    const CMatrix rx = state.matrix() * xs[r].matrix();
    for (Index s = 0; s < p; ++s) {
      const cd v = (rx.transpose().cwiseProduct(xs[s].matrix())).sum();
      z.re(r, s) = v.real();
      z.im(r, s) = v.imag();
    }
  }
  z.re = 0.5 * (z.re + z.re.transpose());
  z.im = 0.5 * (z.im - z.im.transpose());
  return z;
}

namespace {

// Trace norm of a real antisymmetric matrix A through the Hermitian i A.
double antisymmetric_trace_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  const CMatrix h = cd(0, 1) * a.cast<cd>();
  return trace_norm(HermitianMatrix((h + h.adjoint()) * 0.5));
}

void check_weight(const Eigen::MatrixXd& g, Index p) {
  if (g.rows() != p || g.cols() != p) {
    throw ArgumentError("weight matrix must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) throw ArgumentError("weight matrix must be positive semidefinite");
}

}  // namespace

double holevo_objective(const Eigen::MatrixXd& g, const ZMatrix& z) {
  check_weight(g, z.re.rows());
  const Eigen::MatrixXd sg = psd_sqrt<double>(0.5 * (g + g.transpose()));
  return (g * z.re).trace() + antisymmetric_trace_norm(sg * z.im * sg);
}

// ---------------------------------------------------------------------------

namespace {

// Objective over null-space coordinates: X = P + N Y with Y stored
// column-major in a flat vector. K_ij = tr(rho B_i B_j).
struct HolevoProblem {
  Eigen::MatrixXd p;   // nb x params
  Eigen::MatrixXd n;   // nb x n0
  Eigen::MatrixXd kr;  // Re K
  Eigen::MatrixXd ki;  // Im K
  Eigen::MatrixXd g;
  Eigen::MatrixXd sg;

  Eigen::MatrixXd coeffs(const Eigen::VectorXd& y) const {
    if (y.size() == 0) return p;
    return p + n * Eigen::Map<const Eigen::MatrixXd>(y.data(), n.cols(), p.cols());
  }
  ZMatrix z(const Eigen::VectorXd& y) const {
    const Eigen::MatrixXd x = coeffs(y);
    ZMatrix out{x.transpose() * kr * x, x.transpose() * ki * x};
    out.re = 0.5 * (out.re + out.re.transpose());
    out.im = 0.5 * (out.im - out.im.transpose());
    return out;
  }
  double re_term(const ZMatrix& z) const { return (g * z.re).trace(); }
  double im_term(const ZMatrix& z) const { return antisymmetric_trace_norm(sg * z.im * sg); }
  double operator()(const Eigen::VectorXd& y) const {
    const ZMatrix zz = z(y);
    return re_term(zz) + im_term(zz);
  }
};

struct SearchResult {
  Eigen::VectorXd x;
  double f;
  bool converged;
};

// Nelder-Mead with standard coefficients. Stops when the best value has
// improved by less than 1e-10 over `window` iterations.
SearchResult nelder_mead(const HolevoProblem& obj, const Eigen::VectorXd& start, double step, int window,
                         int max_iter) {
  const Index n = start.size();
  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  for (Index i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (Index i = 0; i <= n; ++i) vals[i] = obj(pts[i]);

  std::vector<Index> order(n + 1);
  double best_mark = *std::min_element(vals.begin(), vals.end());
  int since_mark = 0;
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return vals[a] < vals[b]; });
    const Index lo = order.front(), hi = order.back(), second = order[n - 1];

    if (++since_mark >= window) {
      if (best_mark - vals[lo] < 1e-10) return {pts[lo], vals[lo], true};
      best_mark = vals[lo];
      since_mark = 0;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i <= n; ++i) {
      if (i != hi) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
    const double fr = obj(xr);
    if (fr < vals[lo]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
      const double fe = obj(xe);
      if (fe < fr) {
        pts[hi] = xe;
        vals[hi] = fe;
      } else {
        pts[hi] = xr;
        vals[hi] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[hi] = xr;
      vals[hi] = fr;
      continue;
    }
    const bool outside = fr < vals[hi];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
    const double fc = obj(xc);
    if (fc < (outside ? fr : vals[hi])) {
      pts[hi] = xc;
      vals[hi] = fc;
      continue;
    }
    for (Index i = 0; i <= n; ++i) {
      if (i == lo) continue;
      pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
      vals[i] = obj(pts[i]);
    }
  }
  const auto best = std::min_element(vals.begin(), vals.end()) - vals.begin();
  return {pts[best], vals[best], false};
}

}  // namespace

HolevoResult holevo_bound(const ParametricModel& model, const Eigen::MatrixXd& g, const HolevoOptions& opts) {
  const int p = model.param_count();
  check_weight(g, p);
  const XFamily fam = solve_constraints(model);
  const auto basis = hermitian_basis(model.dim());
  const Index nb = static_cast<Index>(basis.size());

  HolevoProblem prob;
  prob.p = fam.particular;
  prob.n = fam.null_basis;
  prob.g = 0.5 * (g + g.transpose());
  prob.sg = psd_sqrt<double>(prob.g);
  CMatrix k(nb, nb);
  for (Index i = 0; i < nb; ++i) {
    const CMatrix rb = model.state.matrix() * basis[i].matrix();
    for (Index j = 0; j < nb; ++j) k(i, j) = (rb.transpose().cwiseProduct(basis[j].matrix())).sum();
  }
  prob.kr = k.real();
  prob.ki = k.imag();

  HolevoResult res;
  res.free_dim = fam.free_dim;
  const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(fam.free_dim);
  res.particular_value = prob(y0);

  Eigen::VectorXd best = y0;
  double best_f = res.particular_value;
  if (fam.free_dim > 0) {
    // Minimizer of the smooth part: N^T Re K (P + N Y) = 0 for every column.
    const Eigen::MatrixXd a = prob.n.transpose() * prob.kr * prob.n;
    const Eigen::MatrixXd b = -prob.n.transpose() * prob.kr * prob.p;
    const Eigen::MatrixXd ys = a.completeOrthogonalDecomposition().solve(b);
    const Eigen::VectorXd y1 = Eigen::Map<const Eigen::VectorXd>(ys.data(), ys.size());
    const ZMatrix z1 = prob.z(y1);
    const double f1 = prob.re_term(z1) + prob.im_term(z1);
    if (f1 < best_f) {
      best = y1;
      best_f = f1;
    }
    if (prob.im_term(z1) <= 1e-12 && !opts.force_search) {
      res.certified = true;
    } else {
      const int window = 50 * fam.free_dim;
      const double scale = std::max(1e-2, 0.1 * prob.p.norm());
      SplitMix64 rng(opts.seed);
      bool best_converged = false;
      for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
        Eigen::VectorXd start;
        double step;
        if (restart == 0) {
          start = y0;
          step = scale;
        } else if (restart == 1) {
          start = y1;
          step = scale;
        } else {
          step = scale * std::pow(0.5, restart - 1);
          start = best;
          for (Index i = 0; i < start.size(); ++i) start(i) += step * (2.0 * rng.uniform() - 1.0);
        }
        const SearchResult sr = nelder_mead(prob, start, step, window, opts.max_iterations);
        if (sr.f < best_f) {
          best_f = sr.f;
          best = sr.x;
          best_converged = sr.converged;
        } else if (restart == 0) {
          best_converged = sr.converged;
        }
      }
      res.converged = best_converged;
    }
  }
  res.value = best_f;
  res.x = fam.operators(basis, prob.coeffs(best));
  res.z = prob.z(best);
  return res;
}

// ---------------------------------------------------------------------------

AveragedHolevo averaged_holevo_mse(const GeneralizedMixture& mix, const Prior& prior, const Eigen::MatrixXd& g,
                                   int resolution, int drop) {
  const int m = mix.param_count();
  if (prior.size() != m) throw ArgumentError("prior and mixture disagree on M");
  const Eigen::VectorXd sums = prior.average<Eigen::VectorXd>(
      [&](const WeightVector& w) {
        const PointwiseModel pm(mix, w);
        const HolevoResult hr = holevo_bound(eliminate(pm, drop), g);
        Eigen::VectorXd v(4);
        v << hr.value, (g * hr.z.re).trace(), hr.value - (g * hr.z.re).trace(), hr.converged ? 0.0 : 1.0;
        return v;
      },
      resolution, Eigen::VectorXd::Zero(4));
  AveragedHolevo out;
  out.value = sums(0);
  out.re_part = sums(1);
  out.im_part = sums(2);
  out.all_converged = sums(3) == 0.0;
  out.caveat =
      "prior average of the pointwise Holevo bound; its attainability after averaging is heuristic, not proven";
  return out;
}

RelationCheck cr_holevo_relation_check(const PointwiseModel& model, int drop) {
  if (drop < 0) drop = model.param_count() - 1;
  const ParametricModel em = eliminate(model, drop);
  const XFamily fam = solve_constraints(em);
  if (fam.free_dim != 0) {
    throw PreconditionError("relation check needs uniquely determined X, free dimension is " +
                            std::to_string(fam.free_dim));
  }
  const auto basis = hermitian_basis(model.dim());
  const ZMatrix z = z_matrix(em.state, fam.operators(basis, fam.particular));
  const SldSet s = sld_pointwise(model);
  const Eigen::MatrixXd reduced = reduced_block(project_and_invert(qfi(model.state().hermitian(), s)).pseudo_inverse, drop);
  RelationCheck out;
  out.distance = (reduced - z.re).norm();
  out.max_commutator = max_sld_commutator(s);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void orient(Eigen::VectorXd& v) {
  Eigen::Index arg;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

}  // namespace

ParametricModel Reparametrization::informative_model(const GeneralizedMixture& mix, const WeightVector& w) const {
  ParametricModel out;
  out.state = average_state(mix, w).hermitian();
  for (int i = 0; i < informative_count; ++i) {
    out.partials.push_back(weighted_sum(mix.components(), orthogonal_map.row(i).transpose()));
  }
  return out;
}

Reparametrization reparametrize(const GeneralizedMixture& mix, const Prior& prior, double tol) {
  if (!mix.is_linear()) throw PreconditionError("reparametrization requires a linear mixture");
  const int m = mix.param_count();
  Reparametrization rep;
  rep.orthogonal_map.resize(m, m);
  rep.orthogonal_map.row(m - 1).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  if (m == 1) return rep;

  const Eigen::MatrixXd q = zero_sum_basis(m);
  const Eigen::MatrixXd restricted = state_map_matrix(mix.components()) * q;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted, Eigen::ComputeFullV);
  rep.singular_values = svd.singularValues();
  std::vector<Eigen::VectorXd> xi, eta;
  for (int i = 0; i < m - 1; ++i) {
    Eigen::VectorXd v = q * svd.matrixV().col(i);
    if (svd.singularValues()(i) >= tol) {
      orient(v);
      xi.push_back(v);
    } else {
      eta.push_back(v);
    }
  }
  rep.informative_count = static_cast<int>(xi.size());
  rep.redundant_count = static_cast<int>(eta.size());

  if (!eta.empty()) {
    // Rotate the redundant block to descending prior variance.
    const Eigen::MatrixXd cov = prior_moments(prior, mix).covariance;
    Eigen::MatrixXd e(m, rep.redundant_count);
    for (int j = 0; j < rep.redundant_count; ++j) e.col(j) = eta[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * cov * e);
    const Eigen::MatrixXd rotated = e * es.eigenvectors().rowwise().reverse();
    for (int j = 0; j < rep.redundant_count; ++j) {
      eta[j] = rotated.col(j);
      orient(eta[j]);
    }
  }
  int row = 0;
  for (const auto& v : xi) rep.orthogonal_map.row(row++) = v.transpose();
  for (const auto& v : eta) rep.orthogonal_map.row(row++) = v.transpose();
  return rep;
}

UnidentifiableError unidentifiable_error(const GeneralizedMixture& mix, const Prior& prior, int n, int resolution,
                                         const HolevoOptions& opts) {
  if (n < 1) throw ArgumentError("number of copies must be positive");
  const Reparametrization rep = reparametrize(mix, prior);
  UnidentifiableError out;
  out.informative_count = rep.informative_count;
  if (rep.redundant_count > 0) {
    const Eigen::MatrixXd cov = prior_moments(prior, mix).covariance;
    const Eigen::MatrixXd e = rep.eta_rows();
    out.intrinsic = (e * cov * e.transpose()).trace();
  }
  if (rep.informative_count > 0) {
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(rep.informative_count, rep.informative_count);
    const Eigen::VectorXd sums = prior.average<Eigen::VectorXd>(
        [&](const WeightVector& w) {
          const HolevoResult hr = holevo_bound(rep.informative_model(mix, w), g, opts);
          Eigen::VectorXd v(2);
          v << hr.value, hr.converged ? 0.0 : 1.0;
          return v;
        },
        resolution, Eigen::VectorXd::Zero(2));
    out.asymptotic_coeff = sums(0);
    out.all_converged = sums(1) == 0.0;
  }
  out.total = out.intrinsic + out.asymptotic_coeff / n;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<DensityMatrix> tetrahedron_states() {
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<Eigen::Vector3d> n{{s, -s, -s}, {-s, s, -s}, {-s, -s, s}, {s, s, s}};
  std::vector<DensityMatrix> out;
  for (const auto& v : n) out.push_back(bloch_to_density(v));
  return out;
}

std::vector<DensityMatrix> four_state_unidentifiable() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<DensityMatrix> out;
  for (const auto& v : {CVector{{1.0, 0.0}}, CVector{{0.0, 1.0}}, CVector{{s, s}}, CVector{{s, -s}}}) {
    out.push_back(DensityMatrix::pure(v));
  }
  return out;
}

}  // namespace qmix
