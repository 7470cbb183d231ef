#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "qmix/hermitian.hpp"

namespace qmix {

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kIdentifiabilityTolerance = 1e-9;

/// A point on the unit (M-1)-simplex.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(Eigen::VectorXd w, double tol = kSimplexTolerance);

  static WeightVector uniform(int m);
  static WeightVector vertex(int m, int r);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int r) const { return w_(r); }
  const Eigen::VectorXd& values() const { return w_; }

 private:
  Eigen::VectorXd w_;
};

using Exponents = std::vector<int>;

/// Multivariate real polynomial in the weights, stored term by term.
class Polynomial {
 public:
  explicit Polynomial(int variables = 0) : vars_(variables) {}

  static Polynomial constant(int variables, double c);
  static Polynomial variable(int variables, int r);
  static Polynomial monomial(Exponents e, double coeff = 1.0);

  int variables() const { return vars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  void add_term(const Exponents& e, double coeff);

  double operator()(const Eigen::VectorXd& x) const;
  double operator()(const WeightVector& w) const { return (*this)(w.values()); }

  /// True iff the polynomial is exactly the monomial x_r.
  bool is_variable(int r) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  int vars_;
  std::map<Exponents, double> terms_;
};

/// rho(lambda) = sum_alpha c_alpha(lambda) rho_alpha with polynomial
/// coefficient functions summing to one on the simplex.
class GeneralizedMixture {
 public:
  GeneralizedMixture(std::vector<DensityMatrix> components, std::vector<Polynomial> coefficients);

  /// rho(lambda) = sum_r lambda_r rho_r.
  static GeneralizedMixture linear(std::vector<DensityMatrix> components);

  int param_count() const { return params_; }
  int size() const { return static_cast<int>(components_.size()); }
  Index dim() const { return components_.front().dim(); }
  const std::vector<DensityMatrix>& components() const { return components_; }
  const std::vector<Polynomial>& coefficients() const { return coefficients_; }
  bool is_linear() const;

  Eigen::VectorXd coefficient_values(const WeightVector& w) const;

 private:
  std::vector<DensityMatrix> components_;
  std::vector<Polynomial> coefficients_;
  int params_ = 0;
};

/// Sum of c_alpha(lambda) rho_alpha; throws ModelError if the result is not
/// PSD within 1e-8.
DensityMatrix average_state(const GeneralizedMixture& mix, const WeightVector& w);

/// Same sum without the positivity check (used for derivatives and by
/// callers that validate separately).
HermitianMatrix weighted_sum(std::span<const DensityMatrix> parts, const Eigen::VectorXd& weights);

struct IdentifiabilityReport {
  bool identifiable = true;
  std::vector<Eigen::VectorXd> kernel_basis;
  int rank = 0;
  Eigen::VectorXd singular_values;  // of the state map restricted to zero-sum directions
};

/// Orthonormal basis (columns) of the complement of (1,...,1) in R^m.
Eigen::MatrixXd zero_sum_basis(int m);

/// Real matrix whose column r is rho_r flattened to (Re, Im) entries, so that
/// Frobenius norms of linear combinations become Euclidean norms.
Eigen::MatrixXd state_map_matrix(std::span<const DensityMatrix> parts);

IdentifiabilityReport identifiability(const GeneralizedMixture& mix,
                                      double tol = kIdentifiabilityTolerance);

using OccupationVector = std::vector<int>;

/// All occupation vectors of length m summing to n, in descending
/// lexicographic order ((n,0,..), (n-1,1,..), ...).
std::vector<OccupationVector> occupation_vectors(int m, int n);

/// N-copy expansion: one component per occupation vector k with state
/// S(rho_1^{k_1} (x) ... (x) rho_M^{k_M}) and coefficient N! prod lambda_r^{k_r}/k_r!.
GeneralizedMixture multicopy_expand(const GeneralizedMixture& mix, int copies);

DensityMatrix bloch_to_density(const Eigen::Vector3d& r);
Eigen::Vector3d density_to_bloch(const DensityMatrix& rho);

}  // namespace qmix
