#include "qmix/mixture.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qmix/random.hpp"

namespace qmix {

WeightVector::WeightVector(Eigen::VectorXd w, double tol) : w_(std::move(w)) {
  if (w_.size() == 0) throw ArgumentError("weight vector is empty");
  for (Eigen::Index r = 0; r < w_.size(); ++r) {
    if (!std::isfinite(w_(r)) || w_(r) < -tol || w_(r) > 1.0 + tol) {
      throw ArgumentError("weight " + std::to_string(r) + " = " + std::to_string(w_(r)) +
                          " lies outside [0, 1]");
    }
  }
  if (std::abs(w_.sum() - 1.0) > tol) {
    throw ArgumentError("weights sum to " + std::to_string(w_.sum()) + ", not 1");
  }
}

WeightVector WeightVector::uniform(int m) {
  return WeightVector(Eigen::VectorXd::Constant(m, 1.0 / m));
}

WeightVector WeightVector::vertex(int m, int r) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  w(r) = 1.0;
  return WeightVector(w);
}

// ---------------------------------------------------------------------------

Polynomial Polynomial::constant(int variables, double c) {
  Polynomial p(variables);
  p.add_term(Exponents(variables, 0), c);
  return p;
}

Polynomial Polynomial::variable(int variables, int r) {
  Exponents e(variables, 0);
  e.at(r) = 1;
  return monomial(e);
}

Polynomial Polynomial::monomial(Exponents e, double coeff) {
  Polynomial p(static_cast<int>(e.size()));
  p.add_term(e, coeff);
  return p;
}

void Polynomial::add_term(const Exponents& e, double coeff) {
  if (static_cast<int>(e.size()) != vars_) throw ArgumentError("exponent vector length mismatch");
  for (int k : e) {
    if (k < 0) throw ArgumentError("negative exponent in polynomial term");
  }
  auto [it, inserted] = terms_.try_emplace(e, coeff);
  if (!inserted) it->second += coeff;
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != vars_) throw ArgumentError("polynomial evaluated at a point of wrong length");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int r = 0; r < vars_; ++r) {
      for (int k = 0; k < e[r]; ++k) t *= x(r);
    }
    acc += t;
  }
  return acc;
}

bool Polynomial::is_variable(int r) const {
  if (terms_.size() != 1) return false;
  const auto& [e, c] = *terms_.begin();
  if (c != 1.0) return false;
  for (int s = 0; s < vars_; ++s) {
    if (e[s] != (s == r ? 1 : 0)) return false;
  }
  return true;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.vars_ != vars_) throw ArgumentError("adding polynomials in different variable counts");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.vars_ != b.vars_) throw ArgumentError("multiplying polynomials in different variable counts");
  Polynomial out(a.vars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GeneralizedMixture::GeneralizedMixture(std::vector<DensityMatrix> components,
                                       std::vector<Polynomial> coefficients)
    : components_(std::move(components)), coefficients_(std::move(coefficients)) {
  if (components_.empty()) throw ArgumentError("mixture needs at least one component");
  if (components_.size() != coefficients_.size()) {
    throw ArgumentError("mixture has " + std::to_string(components_.size()) + " components but " +
                        std::to_string(coefficients_.size()) + " coefficient functions");
  }
  const Index d = components_.front().dim();
  for (const auto& c : components_) {
    if (c.dim() != d) throw ArgumentError("mixture components must share one dimension");
  }
  params_ = coefficients_.front().variables();
  if (params_ < 1) throw ArgumentError("mixture needs at least one weight");
  for (const auto& p : coefficients_) {
    if (p.variables() != params_) throw ArgumentError("coefficient functions disagree on M");
  }
  // Coefficients must sum to one on the simplex.
  SplitMix64 rng(0x51A7E5ULL);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = sample_flat_simplex(params_, rng);
    double s = 0.0;
    for (const auto& p : coefficients_) s += p(x);
    if (std::abs(s - 1.0) > 1e-10) {
      throw ArgumentError("coefficient functions sum to " + std::to_string(s) +
                          " at a simplex point, not 1");
    }
  }
}

GeneralizedMixture GeneralizedMixture::linear(std::vector<DensityMatrix> components) {
  const int m = static_cast<int>(components.size());
  std::vector<Polynomial> coeffs;
  coeffs.reserve(m);
  for (int r = 0; r < m; ++r) coeffs.push_back(Polynomial::variable(m, r));
  return GeneralizedMixture(std::move(components), std::move(coeffs));
}

bool GeneralizedMixture::is_linear() const {
  if (size() != params_) return false;
  for (int r = 0; r < params_; ++r) {
    if (!coefficients_[r].is_variable(r)) return false;
  }
  return true;
}

Eigen::VectorXd GeneralizedMixture::coefficient_values(const WeightVector& w) const {
  if (w.size() != params_) {
    throw ArgumentError("weight vector has length " + std::to_string(w.size()) + ", mixture expects " +
                        std::to_string(params_));
  }
  Eigen::VectorXd c(size());
  for (int a = 0; a < size(); ++a) c(a) = coefficients_[a](w);
  return c;
}

HermitianMatrix weighted_sum(std::span<const DensityMatrix> parts, const Eigen::VectorXd& weights) {
  CMatrix acc = CMatrix::Zero(parts.front().dim(), parts.front().dim());
  for (std::size_t a = 0; a < parts.size(); ++a) {
    if (weights(static_cast<Index>(a)) != 0.0) acc += weights(static_cast<Index>(a)) * parts[a].matrix();
  }
  return HermitianMatrix(acc);
}

DensityMatrix average_state(const GeneralizedMixture& mix, const WeightVector& w) {
  const HermitianMatrix rho = weighted_sum(mix.components(), mix.coefficient_values(w));
  const double lo = min_eigenvalue(rho);
  if (lo < -1e-8) {
    throw ModelError("mixture state has negative eigenvalue " + std::to_string(lo) +
                     " at the requested weights");
  }
  return DensityMatrix(rho, 1e-8);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd zero_sum_basis(int m) {
  // Householder-style completion: QR of [u | I] gives u/|u| as the first
  // column; the remaining columns span its complement.
  Eigen::MatrixXd a(m, m);
  a.col(0).setOnes();
  for (int j = 1; j < m; ++j) {
    a.col(j).setZero();
    a(j - 1, j) = 1.0;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  return q.rightCols(m - 1);
}

Eigen::MatrixXd state_map_matrix(std::span<const DensityMatrix> parts) {
  const Index d = parts.front().dim();
  Eigen::MatrixXd a(2 * d * d, static_cast<Index>(parts.size()));
  for (std::size_t r = 0; r < parts.size(); ++r) {
    const CMatrix& m = parts[r].matrix();
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        a(2 * (i * d + j), static_cast<Index>(r)) = m(i, j).real();
        a(2 * (i * d + j) + 1, static_cast<Index>(r)) = m(i, j).imag();
      }
    }
  }
  return a;
}

namespace {

void orient_largest_positive(Eigen::VectorXd& v) {
  Eigen::Index arg;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

}  // namespace

IdentifiabilityReport identifiability(const GeneralizedMixture& mix, double tol) {
  if (!mix.is_linear()) throw PreconditionError("identifiability requires a linear mixture");
  const int m = mix.param_count();
  IdentifiabilityReport report;
  if (m == 1) {
    report.rank = 0;
    return report;
  }
  const Eigen::MatrixXd q = zero_sum_basis(m);
  const Eigen::MatrixXd restricted = state_map_matrix(mix.components()) * q;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted, Eigen::ComputeFullV);
  report.singular_values = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  for (int i = 0; i < m - 1; ++i) {
    if (svd.singularValues()(i) >= tol) {
      ++report.rank;
    } else {
      Eigen::VectorXd k = q * v.col(i);
      orient_largest_positive(k);
      report.kernel_basis.push_back(k);
    }
  }
  report.identifiable = report.kernel_basis.empty();
  return report;
}

// ---------------------------------------------------------------------------

std::vector<OccupationVector> occupation_vectors(int m, int n) {
  if (m < 1 || n < 0) throw ArgumentError("occupation vectors need m >= 1 and n >= 0");
  std::vector<OccupationVector> out;
  OccupationVector k(m, 0);
  // Recursive fill in descending lexicographic order.
  auto fill = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == m - 1) {
      k[pos] = remaining;
      out.push_back(k);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      k[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  fill(fill, 0, n);
  return out;
}

GeneralizedMixture multicopy_expand(const GeneralizedMixture& mix, int copies) {
  if (copies < 1) throw ArgumentError("number of copies must be positive, got " + std::to_string(copies));
  if (!mix.is_linear()) throw PreconditionError("multicopy expansion requires a linear mixture");
  const int m = mix.param_count();
  check_composite_dimension(std::pow(static_cast<long double>(mix.dim()), copies), dimension_cap());

  std::vector<DensityMatrix> comps;
  std::vector<Polynomial> coeffs;
  for (const auto& k : occupation_vectors(m, copies)) {
    std::vector<DensityMatrix> parts;
    double multinomial = std::tgamma(copies + 1.0);
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < k[r]; ++i) parts.push_back(mix.components()[r]);
      multinomial /= std::tgamma(k[r] + 1.0);
    }
    comps.push_back(symmetrize(parts));
    coeffs.push_back(Polynomial::monomial(k, std::round(multinomial)));
  }
  return GeneralizedMixture(std::move(comps), std::move(coeffs));
}

// ---------------------------------------------------------------------------

DensityMatrix bloch_to_density(const Eigen::Vector3d& r) {
  if (r.norm() > 1.0 + 1e-12) {
    throw ArgumentError("Bloch vector length " + std::to_string(r.norm()) + " exceeds 1");
  }
  HermitianMatrix h = HermitianMatrix::identity(2);
  for (int a = 0; a < 3; ++a) h += pauli(a) * r(a);
  return DensityMatrix(h * 0.5, 1e-12);
}

Eigen::Vector3d density_to_bloch(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw ArgumentError("Bloch vectors exist only for qubits");
  Eigen::Vector3d r;
  for (int a = 0; a < 3; ++a) r(a) = hs_inner(rho.hermitian(), pauli(a));
  return r;
}

}  // namespace qmix
