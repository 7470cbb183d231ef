#include "qmix/simplex.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <sstream>

namespace qmix {

namespace mp = boost::multiprecision;

namespace {

constexpr int kExactFactorialLimit = 40;

mp::cpp_int factorial(int n) {
  mp::cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// (a + b - 1)! / (a - 1)! as an integer, i.e. the rising factorial a^(b).
mp::cpp_int rising(int a, int b) {
  mp::cpp_int f = 1;
  for (int i = 0; i < b; ++i) f *= (a + i);
  return f;
}

int total(const Exponents& k) { return std::accumulate(k.begin(), k.end(), 0); }

void check_exponents(const Exponents& k) {
  if (k.empty()) throw ArgumentError("exponent vector is empty");
  for (int e : k) {
    if (e < 0) throw ArgumentError("exponents must be non-negative");
  }
}

// (M-1)! * dirichlet_moment(k) as an exact rational.
mp::cpp_rational flat_moment_exact(const Exponents& k) {
  const int m = static_cast<int>(k.size());
  mp::cpp_int num = factorial(m - 1);
  for (int e : k) num *= factorial(e);
  return mp::cpp_rational(num, factorial(m - 1 + total(k)));
}

}  // namespace

double dirichlet_moment(const Exponents& k) {
  check_exponents(k);
  const int m = static_cast<int>(k.size());
  const int top = m - 1 + total(k);
  if (top <= kExactFactorialLimit) {
    mp::cpp_int num = 1;
    for (int e : k) num *= factorial(e);
    return static_cast<double>(mp::cpp_rational(num, factorial(top)));
  }
  double log_value = -std::lgamma(top + 1.0);
  for (int e : k) log_value += std::lgamma(e + 1.0);
  return std::exp(log_value);
}

double dirichlet_expectation(const std::vector<int>& alpha, const Exponents& k) {
  check_exponents(k);
  if (alpha.size() != k.size()) throw ArgumentError("Dirichlet parameters and exponents differ in length");
  int a_sum = 0;
  for (int a : alpha) {
    if (a < 1) throw ArgumentError("Dirichlet parameters must be positive integers");
    a_sum += a;
  }
  const int k_sum = total(k);
  if (a_sum + k_sum <= kExactFactorialLimit) {
    mp::cpp_int num = 1;
    for (std::size_t r = 0; r < k.size(); ++r) num *= rising(alpha[r], k[r]);
    return static_cast<double>(mp::cpp_rational(num, rising(a_sum, k_sum)));
  }
  double log_value = std::lgamma(a_sum) - std::lgamma(a_sum + k_sum);
  for (std::size_t r = 0; r < k.size(); ++r) {
    log_value += std::lgamma(alpha[r] + k[r]) - std::lgamma(alpha[r]);
  }
  return std::exp(log_value);
}

double flat_average(const Polynomial& p) {
  double acc = 0.0;
  for (const auto& [e, c] : p.terms()) {
    const int top = static_cast<int>(e.size()) - 1 + total(e);
    const double moment = top <= kExactFactorialLimit
                              ? static_cast<double>(flat_moment_exact(e))
                              : std::tgamma(static_cast<double>(e.size())) * dirichlet_moment(e);
    acc += c * moment;
  }
  return acc;
}

namespace detail {

std::vector<std::vector<double>> kuhn_centroid_offsets(int d) {
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<double>> out;
  do {
    // perm[t] is the coordinate incremented at step t (0-based), which is
    // set in d - t of the d + 1 vertices.
    std::vector<double> off(d);
    for (int t = 0; t < d; ++t) off[perm[t]] = static_cast<double>(d - t) / (d + 1);
    out.push_back(std::move(off));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace detail

double quadrature_cell_count(int m, int resolution) {
  return std::pow(static_cast<double>(resolution), m - 1);
}

// ---------------------------------------------------------------------------

Prior Prior::flat(int m) {
  if (m < 1) throw ArgumentError("prior needs at least one weight");
  Prior p;
  p.kind_ = Kind::flat;
  p.m_ = m;
  p.alpha_.assign(m, 1);
  return p;
}

Prior Prior::dirichlet(std::vector<int> alpha) {
  if (alpha.empty()) throw ArgumentError("prior needs at least one weight");
  for (int a : alpha) {
    if (a < 1) throw ArgumentError("Dirichlet parameters must be positive integers");
  }
  Prior p;
  const bool flat = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 1; });
  p.kind_ = flat ? Kind::flat : Kind::dirichlet;
  p.m_ = static_cast<int>(alpha.size());
  p.alpha_ = std::move(alpha);
  return p;
}

Prior Prior::custom(int m, Density density, int resolution) {
  if (m < 1) throw ArgumentError("prior needs at least one weight");
  if (!density) throw ArgumentError("custom prior needs a density function");
  Prior p;
  p.kind_ = Kind::custom;
  p.m_ = m;
  p.resolution_ = resolution;
  p.density_ = std::move(density);
  const double fact = std::tgamma(static_cast<double>(m));
  p.mass_ = simplex_quadrature<double>(
      m,
      [&](const WeightVector& w) {
        const double v = p.density_(w);
        if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("prior density must be finite and non-negative");
        return v;
      },
      resolution, 0.0);
  // Flat average of the density divided by (M-1)! is its integral.
  if (std::abs(p.mass_ / fact - 1.0) > kCustomPriorNormalizationTolerance) {
    throw ArgumentError("custom prior integrates to " + std::to_string(p.mass_ / fact) + ", not 1");
  }
  return p;
}

double Prior::density(const WeightVector& w) const {
  if (w.size() != m_) throw ArgumentError("weight vector length does not match prior");
  switch (kind_) {
    case Kind::custom:
      return density_(w);
    case Kind::flat:
    case Kind::dirichlet: {
      int a_sum = 0;
      double log_value = 0.0;
      for (int r = 0; r < m_; ++r) {
        a_sum += alpha_[r];
        log_value -= std::lgamma(alpha_[r]);
        if (alpha_[r] > 1) {
          if (w[r] <= 0.0) return 0.0;
          log_value += (alpha_[r] - 1) * std::log(w[r]);
        }
      }
      return std::exp(log_value + std::lgamma(a_sum));
    }
  }
  return 0.0;
}

std::string Prior::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::flat:
      os << "flat";
      break;
    case Kind::dirichlet:
      os << "dirichlet:";
      for (std::size_t r = 0; r < alpha_.size(); ++r) os << (r ? "," : "") << alpha_[r];
      break;
    case Kind::custom:
      os << "custom";
      break;
  }
  return os.str();
}

Eigen::VectorXd Prior::expectations(const std::vector<Polynomial>& ps) const {
  const Index n = static_cast<Index>(ps.size());
  for (const auto& p : ps) {
    if (p.variables() != m_) throw ArgumentError("polynomial variable count does not match prior");
  }
  Eigen::VectorXd out(n);
  if (kind_ != Kind::custom) {
    for (Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [e, c] : ps[i].terms()) acc += c * dirichlet_expectation(alpha_, e);
      out(i) = acc;
    }
    return out;
  }
  const Eigen::VectorXd sums = simplex_quadrature<Eigen::VectorXd>(
      m_,
      [&](const WeightVector& w) {
        Eigen::VectorXd v(n);
        const double dens = density_(w);
        for (Index i = 0; i < n; ++i) v(i) = dens * ps[i](w);
        return v;
      },
      resolution_, Eigen::VectorXd::Zero(n));
  return sums / mass_;
}

double Prior::expectation(const Polynomial& p) const { return expectations({p})(0); }

// ---------------------------------------------------------------------------

PriorMoments prior_moments(const Prior& prior, const GeneralizedMixture& mix) {
  const int m = mix.param_count();
  if (prior.size() != m) {
    throw ArgumentError("prior has " + std::to_string(prior.size()) + " weights, mixture has " +
                        std::to_string(m));
  }
  const int na = mix.size();

  // Layout: lambda_r (m), lambda_r lambda_s for r <= s, c_alpha (na),
  // lambda_r c_alpha (m * na).
  std::vector<Polynomial> ps;
  for (int r = 0; r < m; ++r) ps.push_back(Polynomial::variable(m, r));
  for (int r = 0; r < m; ++r) {
    for (int s = r; s < m; ++s) ps.push_back(Polynomial::variable(m, r) * Polynomial::variable(m, s));
  }
  for (int a = 0; a < na; ++a) ps.push_back(mix.coefficients()[a]);
  for (int r = 0; r < m; ++r) {
    for (int a = 0; a < na; ++a) ps.push_back(Polynomial::variable(m, r) * mix.coefficients()[a]);
  }
  const Eigen::VectorXd e = prior.expectations(ps);

  PriorMoments pm;
  Index at = 0;
  pm.mean = e.segment(at, m);
  at += m;
  pm.covariance.resize(m, m);
  for (int r = 0; r < m; ++r) {
    for (int s = r; s < m; ++s) {
      pm.covariance(r, s) = pm.covariance(s, r) = e(at++) - pm.mean(r) * pm.mean(s);
    }
  }
  pm.coefficient_means = e.segment(at, na);
  at += na;
  pm.cross.assign(na, Eigen::VectorXd(m));
  for (int r = 0; r < m; ++r) {
    for (int a = 0; a < na; ++a) pm.cross[a](r) = e(at++) - pm.mean(r) * pm.coefficient_means(a);
  }
  return pm;
}

PriorMoments flat_multicopy_moments(int m, int n) {
  if (m < 1 || n < 1) throw ArgumentError("flat multicopy moments need M >= 1 and N >= 1");
  PriorMoments pm;
  pm.mean = Eigen::VectorXd::Constant(m, 1.0 / m);
  pm.covariance = Eigen::MatrixXd::Constant(m, m, -1.0 / m);
  pm.covariance.diagonal().array() += 1.0;
  pm.covariance /= static_cast<double>(m) * (m + 1);
  // <c_k> = 1 / binomial(N + M - 1, N), computed exactly.
  const double ck = static_cast<double>(
      mp::cpp_rational(factorial(n) * factorial(m - 1), factorial(n + m - 1)));
  const auto occ = occupation_vectors(m, n);
  pm.coefficient_means = Eigen::VectorXd::Constant(static_cast<Index>(occ.size()), ck);
  for (const auto& k : occ) {
    Eigen::VectorXd v(m);
    for (int r = 0; r < m; ++r) {
      v(r) = static_cast<double>(mp::cpp_rational(k[r] * m - n, m * (n + m))) * ck;
    }
    pm.cross.push_back(v);
  }
  return pm;
}

void validate_moments(const PriorMoments& pm, double tol) {
  const Eigen::MatrixXd& c = pm.covariance;
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > tol) throw ModelError("prior covariance is not symmetric");
  if (c.rowwise().sum().cwiseAbs().maxCoeff() > tol) throw ModelError("prior covariance rows do not sum to zero");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) throw ModelError("prior covariance is not positive semidefinite");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(pm.mean.size());
  for (const auto& v : pm.cross) s += v;
  if (s.cwiseAbs().maxCoeff() > tol) throw ModelError("cross moments do not sum to zero");
}

}  // namespace qmix
