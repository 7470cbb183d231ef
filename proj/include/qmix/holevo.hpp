#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/hermitian.hpp"
#include "qmix/mixture.hpp"
#include "qmix/pointwise.hpp"
#include "qmix/simplex.hpp"

namespace qmix {

inline constexpr double kConstraintTolerance = 1e-10;
inline constexpr int kHolevoRestarts = 8;

/// A state with independent parameters and its partial derivatives.
struct ParametricModel {
  HermitianMatrix state;
  std::vector<HermitianMatrix> partials;

  int param_count() const { return static_cast<int>(partials.size()); }
  Index dim() const { return state.dim(); }
};

/// The M-1 parameter model obtained by eliminating weight `drop`
/// (default: the last one), with partials rho_r - rho_drop.
ParametricModel eliminate(const PointwiseModel& model, int drop = -1);

/// Generalized Gell-Mann matrices normalized to tr(B_i B_j) = delta_ij,
/// followed by I / sqrt(d).
std::vector<HermitianMatrix> hermitian_basis(Index d);

/// Solutions of tr(rho X_s) = 0, tr(d_r rho X_s) = delta_rs, with X_s
/// expanded in hermitian_basis(d).
struct XFamily {
  Eigen::MatrixXd particular;  // column s: least-norm coefficients of X_s
  Eigen::MatrixXd null_basis;  // orthonormal columns spanning the homogeneous solutions of one X_s
  int free_dim = 0;            // param_count * null_basis.cols()

  std::vector<HermitianMatrix> operators(const std::vector<HermitianMatrix>& basis,
                                         const Eigen::MatrixXd& coeffs) const;
};

XFamily solve_constraints(const ParametricModel& model);
XFamily solve_constraints(const PointwiseModel& model, int drop = -1);

/// Largest constraint residual of the given operators.
double constraint_residual(const ParametricModel& model, const std::vector<HermitianMatrix>& xs);

struct ZMatrix {
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;
};

/// Z_rs = tr(rho X_r X_s).
ZMatrix z_matrix(const HermitianMatrix& state, const std::vector<HermitianMatrix>& xs);

/// tr(G Re Z) + || sqrt(G) Im Z sqrt(G) ||_1.
double holevo_objective(const Eigen::MatrixXd& g, const ZMatrix& z);

struct HolevoOptions {
  int restarts = kHolevoRestarts;
  bool force_search = false;     // search even when the smooth minimizer is certified
  int max_iterations = 20000;    // per restart
  std::uint64_t seed = 0x484F4C45ULL;
};

struct HolevoResult {
  double value = 0.0;
  double particular_value = 0.0;  // objective at the least-norm solution
  bool converged = true;
  bool certified = false;         // smooth minimizer has Im Z = 0, hence optimal
  int free_dim = 0;
  std::vector<HermitianMatrix> x;
  ZMatrix z;
};

HolevoResult holevo_bound(const ParametricModel& model, const Eigen::MatrixXd& g, const HolevoOptions& opts = {});

struct AveragedHolevo {
  double value = 0.0;
  double re_part = 0.0;
  double im_part = 0.0;
  bool all_converged = true;
  std::string caveat;
};

/// Prior average of the Holevo bound of the eliminated model, i.e. the
/// coefficient of 1/N in the weighted error tr(G Delta) for the M-1 kept
/// weights. The re/im split is evaluated at the optimal X of each point.
AveragedHolevo averaged_holevo_mse(const GeneralizedMixture& mix, const Prior& prior, const Eigen::MatrixXd& g,
                                   int resolution = kDefaultResolution, int drop = -1);

struct RelationCheck {
  double distance = 0.0;        // | reduced pinv(H_1) - Re Z[X] |_F
  double max_commutator = 0.0;  // max over r < s of || [L_r, L_s] ||
};

/// Compares the quantum CR matrix with Re Z at the unique X. Requires a
/// model whose constraints fix X (free_dim = 0).
RelationCheck cr_holevo_relation_check(const PointwiseModel& model, int drop = -1);

/// Orthogonal change of weights separating informative from redundant
/// directions. Rows of `orthogonal_map`: m xi rows, then the redundant
/// zero-sum rows (eta), then u / sqrt(M).
struct Reparametrization {
  Eigen::MatrixXd orthogonal_map;
  int informative_count = 0;
  int redundant_count = 0;
  Eigen::VectorXd singular_values;

  Eigen::MatrixXd xi_rows() const { return orthogonal_map.topRows(informative_count); }
  Eigen::MatrixXd eta_rows() const { return orthogonal_map.middleRows(informative_count, redundant_count); }

  /// The xi model at weights w: state rho_w, partials sum_j O_ij rho_j.
  ParametricModel informative_model(const GeneralizedMixture& mix, const WeightVector& w) const;
};

Reparametrization reparametrize(const GeneralizedMixture& mix, const Prior& prior,
                                double tol = kIdentifiabilityTolerance);

struct UnidentifiableError {
  double intrinsic = 0.0;
  double asymptotic_coeff = 0.0;
  double total = 0.0;
  int informative_count = 0;
  bool all_converged = true;
};

UnidentifiableError unidentifiable_error(const GeneralizedMixture& mix, const Prior& prior, int n,
                                         int resolution = kDefaultResolution, const HolevoOptions& opts = {});

/// The regular tetrahedron of pure qubit states and the four-state
/// {|0>, |1>, |+>, |->} mixture used as reference examples.
std::vector<DensityMatrix> tetrahedron_states();
std::vector<DensityMatrix> four_state_unidentifiable();

}  // namespace qmix
