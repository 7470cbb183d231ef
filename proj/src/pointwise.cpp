#include "qmix/pointwise.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <numeric>
#include <string>

namespace qmix {

namespace mp = boost::multiprecision;

PointwiseModel::PointwiseModel(const GeneralizedMixture& mix, const WeightVector& w) : w_(w) {
  if (!mix.is_linear()) throw PreconditionError("pointwise model requires a linear mixture");
  if (w.size() != mix.param_count()) throw ArgumentError("weight vector length does not match the mixture");
  for (int r = 0; r < w.size(); ++r) {
    if (w[r] < kInteriorCutoff) {
      throw ArgumentError("weight " + std::to_string(r) + " = " + std::to_string(w[r]) +
                          " is too close to the simplex boundary");
    }
  }
  state_ = average_state(mix, w);
  for (const auto& c : mix.components()) partials_.push_back(c.hermitian());
}

Eigen::MatrixXd fisher_info(const PointwiseModel& model, const Povm& povm) {
  return fisher_information(model.state().hermitian(), model.partials(), povm);
}

SldSet sld_pointwise(const PointwiseModel& model) { return sld(model.state().hermitian(), model.partials()); }

Eigen::MatrixXd qfi_pointwise(const PointwiseModel& model) {
  return qfi(model.state().hermitian(), sld_pointwise(model));
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd simplex_projector(int m) {
  return Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
}

ProjectedMatrix project_and_invert(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() < 2) throw ArgumentError("projection needs a square matrix of size >= 2");
  const int n = static_cast<int>(m.rows());
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const Eigen::MatrixXd q = zero_sum_basis(n);
  const Eigen::MatrixXd k = q.transpose() * sym * q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  const double low = es.eigenvalues().cwiseAbs().minCoeff();
  if (top == 0.0 || low <= rel_tol * top) {
    throw RankError("information matrix is singular on the simplex directions (condition " +
                    std::to_string(top == 0.0 ? 0.0 : low / top) +
                    "); the mixture is unidentifiable, reparametrize first");
  }
  ProjectedMatrix out;
  out.full = m;
  const Eigen::MatrixXd p = simplex_projector(n);
  out.projected = p * sym * p;
  const Eigen::MatrixXd kinv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
  out.pseudo_inverse = q * kinv * q.transpose();
  out.restricted_determinant = es.eigenvalues().prod();
  return out;
}

Eigen::MatrixXd reduced_block(const Eigen::MatrixXd& pinv, int drop) {
  const Index n = pinv.rows();
  if (drop < 0 || drop >= n) throw ArgumentError("elimination index out of range");
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Index i = 0, oi = 0; i < n; ++i) {
    if (i == drop) continue;
    for (Index j = 0, oj = 0; j < n; ++j) {
      if (j == drop) continue;
      out(oi, oj++) = pinv(i, j);
    }
    ++oi;
  }
  return out;
}

Eigen::MatrixXd asymptotic_bayes_error(const GeneralizedMixture& mix, const Prior& prior, int n, int resolution) {
  if (n < 1) throw ArgumentError("number of copies must be positive");
  const int m = mix.param_count();
  if (prior.size() != m) throw ArgumentError("prior and mixture disagree on M");
  if (m < 2) throw ArgumentError("asymptotic error needs at least two weights");
  const IdentifiabilityReport id = identifiability(mix);
  if (!id.identifiable) {
    throw RankError("mixture is unidentifiable (" + std::to_string(id.kernel_basis.size()) +
                    " redundant directions); use the unidentifiable pipeline");
  }
  const Eigen::MatrixXd integral = prior.average<Eigen::MatrixXd>(
      [&](const WeightVector& w) { return project_and_invert(qfi_pointwise(PointwiseModel(mix, w))).pseudo_inverse; },
      resolution, Eigen::MatrixXd::Zero(m, m));
  return integral / n;
}

// ---------------------------------------------------------------------------

double qubit_pair_qfi(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2, double lambda) {
  const Eigen::Vector3d v = r1 - r2;
  const Eigen::Vector3d rl = lambda * r1 + (1.0 - lambda) * r2;
  const double proj = v.dot(rl);
  return v.squaredNorm() + proj * proj / (1.0 - rl.squaredNorm());
}

double pure_pair_qfi(double overlap, double lambda) {
  return (1.0 - overlap * overlap) / (lambda * (1.0 - lambda));
}

double pure_pair_asymptotic_coeff(double overlap) { return 1.0 / (6.0 * (1.0 - overlap * overlap)); }

double qubit_pair_asymptotic_coeff(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2) {
  const double a = r1.squaredNorm();
  const double b = r2.squaredNorm();
  const double ab = r1.dot(r2);
  const double num = 6.0 - (r1 + r2).squaredNorm() - a - b;
  const double den = (r1 - r2).squaredNorm() - a * b + ab * ab;
  return num / (6.0 * den);
}

double qubit_pair_asymptotic_coeff(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != 2 || rho2.dim() != 2) throw ArgumentError("closed form applies to qubits only");
  const double p1 = rho1.purity();
  const double p2 = rho2.purity();
  const double t = hs_inner(rho1.hermitian(), rho2.hermitian());
  return (3.0 - p1 - p2 - t) / (6.0 * (p1 + p2 - p1 * p2 - (2.0 - t) * t));
}

// ---------------------------------------------------------------------------

namespace {

mp::cpp_int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  mp::cpp_int b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Exact p/q with q a power of two for a finite double in (0, 1].
void to_binary_rational(double x, mp::cpp_int& p, mp::cpp_int& q) {
  int exp = 0;
  const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, mant in [0.5, 1)
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  p = scaled;
  q = 1;
  const int shift = 53 - exp;
  if (shift >= 0) {
    q <<= shift;
  } else {
    p <<= -shift;
  }
  const unsigned tz = p == 0 ? 0 : mp::lsb(p);
  const unsigned qz = mp::lsb(q);
  const unsigned common = std::min(tz, qz);
  p >>= common;
  q >>= common;
}

}  // namespace

double commuting_exact_error(double eps, int n) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("epsilon must lie in (0, 1]");
  if (n < 1) throw ArgumentError("number of copies must be positive");
  mp::cpp_int p, q;
  to_binary_rational(eps, p, q);

  // Scale every Beta moment by L = lcm(1..N+2) so that 1/(i+1) and
  // 2/(i+2) - 1/(i+1) become integers, and every power eps^a (1-eps)^b
  // by q^N. A_k and B_k then become integers a_k = A_k q^N L and b_k.
  mp::cpp_int lcm = 1;
  for (int i = 2; i <= n + 2; ++i) lcm = lcm / mp::gcd(lcm, mp::cpp_int(i)) * i;

  std::vector<mp::cpp_int> ppow(n + 1), qpow(n + 1);
  ppow[0] = qpow[0] = 1;
  for (int i = 1; i <= n; ++i) {
    ppow[i] = ppow[i - 1] * p;
    qpow[i] = qpow[i - 1] * q;
  }
  const mp::cpp_int scale = qpow[n] * lcm;

  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    // (eps lambda)^k (1 - eps lambda)^(N-k) = sum_j C(N-k, j) (-1)^j eps^(k+j) lambda^(k+j)
    mp::cpp_int a = 0, b = 0;
    for (int j = 0; j <= n - k; ++j) {
      const int i = k + j;
      mp::cpp_int c = binomial(n - k, j) * ppow[i] * qpow[n - i];
      if (j % 2) c = -c;
      a += c * (lcm / (i + 1));
      b += c * (2 * (lcm / (i + 2)) - lcm / (i + 1));
    }
    const mp::cpp_int bin = binomial(n, k);
    a *= bin;
    b *= bin;
    if (a == 0) continue;
    // B_k^2 / A_k = (b^2 / a) / scale.
    sum += static_cast<long double>(mp::cpp_rational(b * b, a * scale));
  }
  return static_cast<double>(1.0L / 12.0L - sum / 4.0L);
}

double commuting_asymptotic_coeff(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("epsilon must lie in (0, 1]");
  return 1.0 / (2.0 * eps) - 1.0 / 3.0;
}

// ---------------------------------------------------------------------------

std::int64_t occupation_sum_formula(int m, int n) {
  if (m < 1 || n < 1) throw ArgumentError("occupation sums need M >= 1 and N >= 1");
  mp::cpp_int fact = 1;
  for (int i = 2; i <= m + n - 1; ++i) fact *= i;
  mp::cpp_int den = m + 1;
  for (int i = 2; i <= m - 1; ++i) den *= i;
  for (int i = 2; i <= n - 1; ++i) den *= i;
  const mp::cpp_int num = (2 * n + m - 1) * fact;
  if (num % den != 0) throw NumericalError("occupation sum formula is not an integer");
  return static_cast<std::int64_t>(num / den);
}

std::int64_t occupation_sum_enumerate(int m, int n) {
  std::int64_t s = 0;
  for (const auto& k : occupation_vectors(m, n)) {
    for (int v : k) s += static_cast<std::int64_t>(v) * v;
  }
  return s;
}

std::int64_t occupation_sum_check(int m, int n) {
  const std::int64_t f = occupation_sum_formula(m, n);
  const std::int64_t e = occupation_sum_enumerate(m, n);
  if (f != e) {
    throw NumericalError("occupation sum formula gives " + std::to_string(f) + " but enumeration gives " +
                         std::to_string(e));
  }
  return f;
}

}  // namespace qmix
