#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "qmix/errors.hpp"
#include "qmix/mixture.hpp"

namespace qmix {

inline constexpr int kDefaultResolution = 200;
inline constexpr double kMaxQuadratureCells = 1e9;
inline constexpr double kCustomPriorNormalizationTolerance = 1e-3;

/// Integral over the simplex of prod lambda_r^{k_r} with respect to
/// d lambda_1 ... d lambda_{M-1}: prod k_r! / (M - 1 + sum k_r)!.
/// Exact rational arithmetic while M - 1 + sum k <= 40, log-Gamma beyond.
double dirichlet_moment(const Exponents& k);

/// E[prod lambda_r^{k_r}] under Dirichlet(alpha) with positive integer alpha.
double dirichlet_expectation(const std::vector<int>& alpha, const Exponents& k);

/// Flat-prior average (M-1)! * integral of p; exact for polynomials.
double flat_average(const Polynomial& p);

namespace detail {

/// Barycentric offsets of the centroids of the Kuhn simplices in one grid
/// cube, one row per permutation, in lexicographic permutation order.
std::vector<std::vector<double>> kuhn_centroid_offsets(int d);

}  // namespace detail

/// Number of cells of the midpoint grid: resolution^(M-1).
double quadrature_cell_count(int m, int resolution);

/// Flat-prior average of f by the midpoint rule on a Freudenthal
/// triangulation of the simplex with `resolution` cells per edge. Cells
/// are visited in a fixed order; chunks may run on several threads but are
/// reduced in chunk order, so the result does not depend on thread count.
///
/// T must support T + T and be copyable; `zero` is the additive identity.
template <typename T, typename F>
T simplex_quadrature(int m, F&& f, int resolution = kDefaultResolution, T zero = T{},
                     unsigned threads = 0) {
  if (m < 1) throw ArgumentError("simplex dimension must be positive");
  if (resolution < 2) throw ArgumentError("quadrature resolution must be at least 2");
  const double cells = quadrature_cell_count(m, resolution);
  if (cells > kMaxQuadratureCells) {
    throw SizeError("quadrature would visit " + std::to_string(cells) + " cells; lower the resolution");
  }
  if (m == 1) return f(WeightVector(Eigen::VectorXd::Ones(1)));

  const int d = m - 1;
  const int n = resolution;
  const auto offsets = detail::kuhn_centroid_offsets(d);

  // Cells are grouped by the first cube index i_1; each group is one chunk.
  auto run_chunk = [&](int first) {
    T acc = zero;
    std::vector<int> idx(d, first);
    Eigen::VectorXd x(d), lam(m);
    while (true) {
      for (const auto& off : offsets) {
        bool ok = true;
        for (int a = 0; a + 1 < d && ok; ++a) {
          if (idx[a] == idx[a + 1] && off[a] > off[a + 1]) ok = false;
        }
        if (!ok) continue;
        for (int a = 0; a < d; ++a) x(a) = (idx[a] + off[a]) / n;
        lam(0) = x(0);
        for (int a = 1; a < d; ++a) lam(a) = x(a) - x(a - 1);
        lam(d) = 1.0 - x(d - 1);
        acc = acc + f(WeightVector(lam, 1e-9));
      }
      // Next non-decreasing tuple with idx[0] fixed.
      int pos = d - 1;
      while (pos >= 1 && idx[pos] == n - 1) --pos;
      if (pos < 1) break;
      ++idx[pos];
      for (int a = pos + 1; a < d; ++a) idx[a] = idx[pos];
    }
    return acc;
  };

  std::vector<T> partial(n, zero);
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) partial[i] = run_chunk(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n && !failed; i = next++) {
          try {
            partial[i] = run_chunk(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  T total = zero;
  for (const auto& p : partial) total = total + p;
  return total * (1.0 / cells);
}

/// Prior density over the simplex.
class Prior {
 public:
  enum class Kind { flat, dirichlet, custom };
  using Density = std::function<double(const WeightVector&)>;

  /// Uniform density (M-1)!.
  static Prior flat(int m);
  /// Dirichlet(alpha) with positive integer parameters; moments are exact.
  static Prior dirichlet(std::vector<int> alpha);
  /// User density. Normalization is checked by quadrature, never repaired.
  static Prior custom(int m, Density density, int resolution = kDefaultResolution);

  Kind kind() const { return kind_; }
  int size() const { return m_; }
  int resolution() const { return resolution_; }
  const std::vector<int>& alpha() const { return alpha_; }
  double density(const WeightVector& w) const;
  std::string describe() const;

  /// Prior expectations of several polynomials. Exact for flat and
  /// Dirichlet priors; one shared quadrature pass for custom densities,
  /// normalized by the discrete mass so that E[1] = 1 exactly.
  Eigen::VectorXd expectations(const std::vector<Polynomial>& ps) const;
  double expectation(const Polynomial& p) const;

  /// Prior expectation of an arbitrary integrand by quadrature.
  template <typename T, typename F>
  T average(F&& f, int resolution, T zero = T{}) const {
    if (kind_ == Kind::flat) return simplex_quadrature<T>(m_, f, resolution, zero);
    auto weighted = [&](const WeightVector& w) -> T { return f(w) * density(w); };
    const T sum = simplex_quadrature<T>(m_, weighted, resolution, zero);
    if (kind_ == Kind::custom) return sum * (1.0 / mass_);
    return sum * (1.0 / std::tgamma(static_cast<double>(m_)));
  }

 private:
  Prior() = default;
  Kind kind_ = Kind::flat;
  int m_ = 0;
  int resolution_ = kDefaultResolution;
  std::vector<int> alpha_;
  Density density_;
  double mass_ = 1.0;
};

/// lambda-bar, Lambda and the cross moments Lambda-tilde_alpha.
struct PriorMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::vector<Eigen::VectorXd> cross;  // one M-vector per mixture component
  Eigen::VectorXd coefficient_means;   // <c_alpha>
};

PriorMoments prior_moments(const Prior& prior, const GeneralizedMixture& mix);

/// Closed forms for the N-copy expansion of an M-component linear mixture
/// under the flat prior, with components ordered as occupation_vectors(M, N).
PriorMoments flat_multicopy_moments(int m, int n);

/// Rows of the covariance summing to zero, PSD and sum of cross vectors
/// vanishing, each within tol; throws ModelError otherwise.
void validate_moments(const PriorMoments& pm, double tol = 1e-12);

}  // namespace qmix
