// qmix command-line front end: reproduce | bound | simulate.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmix/bayes.hpp"
#include "qmix/holevo.hpp"
#include "qmix/io.hpp"
#include "qmix/pointwise.hpp"
#include "qmix/report.hpp"
#include "qmix/simulation.hpp"
#include "qmix/simplex.hpp"

using namespace qmix;

namespace {

constexpr double kCommuteTolerance = 1e-9;
constexpr double kPsdTolerance = -1e-8;
constexpr double kSigmas = 3.0;

struct Options {
  std::string prior = "flat";
  int resolution = kDefaultResolution;
  int trials = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "json";
  std::string out;

  std::string case_name;
  int m = 3;
  int n = 0;  // 0: case default
  double epsilon = 0.5;
  double theta = M_PI / 3;
  double lambda = 0.5;
  double overlap = 0.5;

  std::string file;
  int n_copies = 1;
  bool holevo = false;
  std::string povm_file;
  bool optimal = false;
};

Prior parse_prior(const std::string& spec, int m) {
  if (spec == "flat") return Prior::flat(m);
  const std::string tag = "dirichlet:";
  if (spec.rfind(tag, 0) != 0) throw ArgumentError("--prior must be flat or dirichlet:a1,...,aM");
  std::vector<int> alpha;
  std::size_t pos = tag.size();
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item = spec.substr(pos, comma - pos);
    std::size_t used = 0;
    int a = 0;
    try {
      a = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || a < 1) {
      throw ArgumentError("--prior: Dirichlet parameters must be positive integers, got '" + item + "'");
    }
    alpha.push_back(a);
    pos = comma + 1;
  }
  if (static_cast<int>(alpha.size()) != m) {
    throw ArgumentError("--prior: " + std::to_string(alpha.size()) + " Dirichlet parameters for " +
                        std::to_string(m) + " components");
  }
  return Prior::dirichlet(alpha);
}

void add_check(RunReport& rep, const std::string& name, double measured, double expected, double tol) {
  rep.check(name, std::abs(measured - expected) <= tol, measured, expected, tol);
}

// Joint SLD eigenbasis when the SLDs commute, otherwise the best single-SLD
// eigenbasis over the coordinate directions (smallest tr Delta).
std::pair<Povm, std::string> best_measurement(const EffectiveStateModel& model) {
  if (max_sld_commutator(sld_at_mean(model)) < kCommuteTolerance) {
    return {commuting_sld_measurement(model), "joint SLD eigenbasis"};
  }
  std::optional<Povm> best;
  double best_tr = 0.0;
  int best_r = 0;
  for (int r = 0; r < model.param_count(); ++r) {
    Povm p = optimal_measurement(model, Eigen::VectorXd::Unit(model.param_count(), r));
    const double tr = bayes_error(model, p).mse;
    if (!best || tr < best_tr) {
      best = std::move(p);
      best_tr = tr;
      best_r = r;
    }
  }
  return {*best, "SLD eigenbasis for weight " + std::to_string(best_r + 1)};
}

Eigen::MatrixXd identity(int m) { return Eigen::MatrixXd::Identity(m, m); }

std::vector<DensityMatrix> orthogonal_states(int m) {
  std::vector<DensityMatrix> out;
  for (int r = 0; r < m; ++r) out.push_back(DensityMatrix::pure(CVector::Unit(m, r)));
  return out;
}

void echo_common(RunReport& rep, const Options& o) {
  rep.input("resolution", static_cast<long long>(o.resolution));
  rep.input("seed", static_cast<long long>(o.seed));
  rep.input("trials", static_cast<long long>(o.trials));
}

// ---------------------------------------------------------------------------
// reproduce

RunReport reproduce_orthogonal(const Options& o) {
  const int m = o.m, n = o.n ? o.n : 2;
  if (m < 2) throw ArgumentError("--m must be at least 2");
  if (n < 1) throw ArgumentError("--n must be positive");
  RunReport rep("orthogonal");
  rep.input("M", static_cast<long long>(m));
  rep.input("N", static_cast<long long>(n));
  echo_common(rep, o);
  const GeneralizedMixture expanded = multicopy_expand(GeneralizedMixture::linear(orthogonal_states(m)), n);
  const EffectiveStateModel model(expanded, flat_multicopy_moments(m, n));
  const ErrorReport er = bayes_error(model, commuting_sld_measurement(model));
  const double closed = orthogonal_mse(m, n);
  rep.value("trace_delta_closed_form", closed, Provenance::reference);
  rep.value("trace_delta", er.mse, Provenance::analytic);
  rep.matrix("delta", er.delta, Provenance::analytic);
  rep.matrix("lambda", er.lambda_cov, Provenance::analytic);
  add_check(rep, "trace_delta_matches_closed_form", er.mse, closed, 1e-9);
  return rep;
}

RunReport reproduce_two_pure(const Options& o) {
  const double t = o.overlap;
  if (!(t >= 0.0 && t < 1.0)) throw ArgumentError("--overlap must lie in [0, 1)");
  RunReport rep("two-pure");
  rep.input("M", 2LL);
  rep.input("N", 1LL);
  rep.input("overlap", t);
  echo_common(rep, o);
  CVector a(2), b(2);
  a << 1.0, 0.0;
  b << std::sqrt(t), std::sqrt(1 - t);
  const auto mix = GeneralizedMixture::linear({DensityMatrix::pure(a), DensityMatrix::pure(b)});
  const EffectiveStateModel model(mix, Prior::flat(2));
  const Povm povm = optimal_measurement(model, Eigen::Vector2d(1.0, 0.0));
  const ErrorReport er = bayes_error(model, povm);
  const double closed = (2 + t) / 36;
  rep.value("delta_11_closed_form", closed, Provenance::reference);
  rep.value("delta_11", er.delta(0, 0), Provenance::analytic);
  rep.matrix("delta", er.delta, Provenance::analytic);
  SimConfig cfg;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  const SimResult sim = simulate_bayes_mse(mix, Prior::flat(2), povm, cfg);
  rep.value("delta_11_simulated", sim.delta(0, 0), Provenance::simulated, sim.standard_error(0, 0));
  add_check(rep, "delta_11_matches_closed_form", er.delta(0, 0), closed, 1e-9);
  add_check(rep, "simulation_within_3_se", sim.delta(0, 0), er.delta(0, 0), kSigmas * sim.standard_error(0, 0));
  return rep;
}

RunReport reproduce_tetrahedron(const Options& o) {
  RunReport rep("tetrahedron");
  rep.input("M", 4LL);
  echo_common(rep, o);
  const auto tet = GeneralizedMixture::linear(tetrahedron_states());
  Polynomial re = Polynomial::constant(4, 1.5);
  for (int r = 0; r < 3; ++r) {
    const Polynomial l = Polynomial::variable(4, r);
    re += l * 0.5 + l * l * -1.0;
  }
  const double re_exact = flat_average(re);
  const AveragedHolevo avg = averaged_holevo_mse(tet, Prior::flat(4), identity(3), o.resolution);
  const RelationCheck rel = cr_holevo_relation_check(PointwiseModel(tet, WeightVector::uniform(4)));
  rep.value("re_part_reference", 63.0 / 40, Provenance::reference);
  rep.value("im_part_reference", 0.43, Provenance::reference);
  rep.value("coefficient_reference", 2.01, Provenance::reference);
  rep.value("re_part_exact", re_exact, Provenance::analytic);
  rep.value("re_part_quadrature", avg.re_part, Provenance::analytic);
  rep.value("im_part_quadrature", avg.im_part, Provenance::analytic);
  rep.value("coefficient", avg.value, Provenance::analytic);
  rep.value("barycenter_relation_distance", rel.distance, Provenance::analytic);
  rep.value("barycenter_sld_commutator", rel.max_commutator, Provenance::analytic);
  add_check(rep, "re_part_exact", re_exact, 63.0 / 40, 1e-12);
  add_check(rep, "im_part", avg.im_part, 0.43, 5e-3);
  add_check(rep, "coefficient", avg.value, 2.01, 0.01);
  rep.check("optimizer_converged", avg.all_converged, avg.all_converged, 1.0, 0.0);
  rep.note(avg.caveat);
  return rep;
}

RunReport reproduce_unidentifiable(const Options& o) {
  const int n = o.n ? o.n : 1;
  if (n < 1) throw ArgumentError("--n must be positive");
  RunReport rep("unidentifiable");
  rep.input("M", 4LL);
  rep.input("N", static_cast<long long>(n));
  echo_common(rep, o);
  const UnidentifiableError ue =
      unidentifiable_error(GeneralizedMixture::linear(four_state_unidentifiable()), Prior::flat(4), n, o.resolution);
  rep.value("intrinsic_reference", 1.0 / 20, Provenance::reference);
  rep.value("coefficient_reference", 0.9, Provenance::reference);
  rep.value("intrinsic", ue.intrinsic, Provenance::analytic);
  rep.value("coefficient", ue.asymptotic_coeff, Provenance::analytic);
  rep.value("total", ue.total, Provenance::analytic);
  rep.value("informative_count", ue.informative_count, Provenance::analytic);
  add_check(rep, "intrinsic", ue.intrinsic, 1.0 / 20, 1e-10);
  add_check(rep, "coefficient", ue.asymptotic_coeff, 0.9, 1e-3);
  rep.check("optimizer_converged", ue.all_converged, ue.all_converged, 1.0, 0.0);
  return rep;
}

RunReport reproduce_commuting(const Options& o) {
  const int n = o.n ? o.n : 256;
  const double eps = o.epsilon;
  if (!(eps > 0.0 && eps <= 1.0)) throw ArgumentError("--epsilon must lie in (0, 1]");
  if (n < 1) throw ArgumentError("--n must be positive");
  RunReport rep("commuting");
  rep.input("N", static_cast<long long>(n));
  rep.input("epsilon", eps);
  echo_common(rep, o);
  const double exact = commuting_exact_error(eps, n);
  const double coeff = commuting_asymptotic_coeff(eps);
  rep.value("coefficient_reference", coeff, Provenance::reference);
  rep.value("delta", exact, Provenance::analytic);
  rep.value("n_delta", n * exact, Provenance::analytic);
  add_check(rep, "n_delta_near_coefficient", n * exact, coeff, 0.02);
  if (eps == 1.0) add_check(rep, "half_orthogonal", exact, 0.5 * orthogonal_mse(2, n), 1e-12);
  return rep;
}

RunReport reproduce_adaptive(const Options& o) {
  TwoStepConfig cfg;
  cfg.theta = o.theta;
  cfg.n = o.n ? o.n : 4096;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  RunReport rep("adaptive");
  rep.input("N", static_cast<long long>(cfg.n));
  rep.input("theta", o.theta);
  rep.input("lambda", o.lambda);
  echo_common(rep, o);
  const TwoStepResult r = two_step_adaptive(cfg, o.lambda);
  rep.value("n_mse_bound", r.target, Provenance::analytic);
  rep.value("n_mse", r.n_mse, Provenance::simulated, r.n_mse_se);
  rep.value("n_mse_conditional", r.n_mse_conditional, Provenance::simulated, r.n_mse_conditional_se);
  rep.value("rough_alpha", r.alpha, Provenance::simulated, r.alpha_se);
  rep.value("rough_copies", r.rough_copies, Provenance::analytic);
  rep.value("mean_estimate", r.mean_estimate, Provenance::simulated);
  add_check(rep, "n_mse_within_15_percent", r.n_mse, r.target, 0.15 * r.target);
  return rep;
}

RunReport cmd_reproduce(const Options& o) {
  static const std::map<std::string, RunReport (*)(const Options&)> cases = {
      {"orthogonal", reproduce_orthogonal},   {"two-pure", reproduce_two_pure},
      {"tetrahedron", reproduce_tetrahedron}, {"unidentifiable", reproduce_unidentifiable},
      {"commuting", reproduce_commuting},     {"adaptive", reproduce_adaptive}};
  const auto it = cases.find(o.case_name);
  if (it == cases.end()) throw ArgumentError("unknown case '" + o.case_name + "'");
  return it->second(o);
}

// ---------------------------------------------------------------------------
// bound

RunReport bound_unidentifiable(const Options& o, const GeneralizedMixture& mix, const Prior& prior,
                               const IdentifiabilityReport& id) {
  std::cerr << "warning: " << o.file << ": components are linearly dependent (rank " << id.rank << " of "
            << mix.size() << "); reporting the reparametrized error\n";
  RunReport rep("bound-reparametrized");
  rep.input("file", o.file);
  rep.input("M", static_cast<long long>(mix.size()));
  rep.input("N", static_cast<long long>(o.n_copies));
  rep.input("prior", prior.describe());
  rep.input("holevo", static_cast<long long>(o.holevo));
  echo_common(rep, o);
  const Reparametrization rp = reparametrize(mix, prior);
  const UnidentifiableError ue = unidentifiable_error(mix, prior, o.n_copies, o.resolution);
  rep.value("rank", id.rank, Provenance::analytic);
  rep.value("informative_count", ue.informative_count, Provenance::analytic);
  rep.matrix("orthogonal_map", rp.orthogonal_map, Provenance::analytic);
  rep.value("intrinsic", ue.intrinsic, Provenance::analytic);
  rep.value("coefficient", ue.asymptotic_coeff, Provenance::analytic);
  rep.value("total", ue.total, Provenance::analytic);
  rep.check("optimizer_converged", ue.all_converged, ue.all_converged, 1.0, 0.0);
  rep.note("rank warning: weights are not identifiable; error split into intrinsic and 1/N parts");
  return rep;
}

RunReport cmd_bound(const Options& o) {
  if (o.n_copies < 1) throw ArgumentError("--n-copies must be positive");
  const GeneralizedMixture mix = GeneralizedMixture::linear(read_mixture_file(o.file));
  const int m = mix.size();
  const Prior prior = parse_prior(o.prior, m);
  const IdentifiabilityReport id = identifiability(mix);
  if (!id.identifiable) return bound_unidentifiable(o, mix, prior, id);

  RunReport rep("bound");
  rep.input("file", o.file);
  rep.input("M", static_cast<long long>(m));
  rep.input("N", static_cast<long long>(o.n_copies));
  rep.input("prior", prior.describe());
  rep.input("holevo", static_cast<long long>(o.holevo));
  echo_common(rep, o);

  const GeneralizedMixture expanded = o.n_copies == 1 ? mix : multicopy_expand(mix, o.n_copies);
  const EffectiveStateModel model(expanded, prior);
  const auto [povm, how] = best_measurement(model);
  const ErrorReport er = bayes_error(model, povm);
  const Eigen::MatrixXd quantum = er.lambda_cov - er.qfi_at_mean;
  rep.matrix("lambda", er.lambda_cov, Provenance::analytic);
  rep.matrix("delta", er.delta, Provenance::analytic);
  rep.value("trace_delta", er.mse, Provenance::analytic);
  rep.matrix("lambda_minus_h", quantum, Provenance::analytic);
  rep.value("trace_lambda_minus_h", quantum.trace(), Provenance::analytic);
  rep.note("measurement: " + how);

  const Eigen::VectorXd mean = prior_moments(prior, mix).mean;
  const PointwiseModel at_mean(mix, WeightVector(mean, 1e-9));
  const Eigen::MatrixXd cr = project_and_invert(qfi_pointwise(at_mean)).pseudo_inverse / o.n_copies;
  rep.matrix("projected_cr_at_mean", cr, Provenance::analytic);
  const Eigen::MatrixXd avg_cr = asymptotic_bayes_error(mix, prior, o.n_copies, o.resolution);
  rep.matrix("averaged_projected_cr", avg_cr, Provenance::analytic);
  rep.value("trace_averaged_projected_cr", avg_cr.trace(), Provenance::analytic);

  if (o.holevo) {
    const HolevoResult hr = holevo_bound(eliminate(at_mean), identity(m - 1));
    const AveragedHolevo avg = averaged_holevo_mse(mix, prior, identity(m - 1), o.resolution);
    rep.value("holevo_at_mean", hr.value / o.n_copies, Provenance::analytic);
    rep.value("holevo_averaged_coefficient", avg.value, Provenance::analytic);
    rep.value("holevo_averaged_re_part", avg.re_part, Provenance::analytic);
    rep.value("holevo_averaged_im_part", avg.im_part, Provenance::analytic);
    rep.check("holevo_converged", hr.converged && avg.all_converged, hr.converged && avg.all_converged, 1.0, 0.0);
    rep.note(avg.caveat);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gap(er.delta - quantum, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bc(er.qfi_at_mean - er.fisher_at_mean, Eigen::EigenvaluesOnly);
  const double g = gap.eigenvalues().minCoeff(), b = bc.eigenvalues().minCoeff();
  rep.check("delta_above_lambda_minus_h", g >= kPsdTolerance, g, 0.0, -kPsdTolerance);
  rep.check("fisher_below_qfi", b >= kPsdTolerance, b, 0.0, -kPsdTolerance);
  return rep;
}

// ---------------------------------------------------------------------------
// simulate

RunReport cmd_simulate(const Options& o) {
  if (o.optimal == !o.povm_file.empty()) throw ArgumentError("simulate needs exactly one of --povm or --optimal");
  if (o.n_copies < 1) throw ArgumentError("--n-copies must be positive");
  const GeneralizedMixture mix = GeneralizedMixture::linear(read_mixture_file(o.file));
  const Prior prior = parse_prior(o.prior, mix.size());
  const GeneralizedMixture expanded = o.n_copies == 1 ? mix : multicopy_expand(mix, o.n_copies);
  const EffectiveStateModel model(expanded, prior);

  RunReport rep("simulate");
  rep.input("file", o.file);
  rep.input("povm", o.optimal ? std::string("optimal") : o.povm_file);
  rep.input("M", static_cast<long long>(mix.size()));
  rep.input("N", static_cast<long long>(o.n_copies));
  rep.input("prior", prior.describe());
  echo_common(rep, o);

  Povm povm;
  if (o.optimal) {
    auto [p, how] = best_measurement(model);
    povm = std::move(p);
    rep.note("measurement: " + how);
  } else {
    povm = read_povm_file(o.povm_file);
  }
  const ErrorReport er = bayes_error(model, povm);
  SimConfig cfg;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.n_copies = o.n_copies;
  const SimResult sim = simulate_bayes_mse(mix, prior, povm, cfg);
  rep.matrix("delta", er.delta, Provenance::analytic);
  rep.value("trace_delta", er.mse, Provenance::analytic);
  rep.matrix("delta_simulated", sim.delta, Provenance::simulated);
  rep.matrix("delta_simulated_standard_error", sim.standard_error, Provenance::simulated);
  rep.value("trace_delta_simulated", sim.mse, Provenance::simulated, sim.mse_se);
  add_check(rep, "simulation_within_3_se", sim.mse, er.mse, kSigmas * sim.mse_se);
  return rep;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--prior", o.prior, "flat or dirichlet:a1,...,aM")->capture_default_str();
  cmd->add_option("--resolution", o.resolution, "simplex quadrature resolution")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  cmd->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write the report here instead of standard output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error bounds and simulations for quantum finite mixtures"};
  app.require_subcommand(1);
  Options o;

  auto* reproduce = app.add_subcommand("reproduce", "reproduce a reference example");
  reproduce->add_option("case", o.case_name, "orthogonal | two-pure | tetrahedron | unidentifiable | commuting | adaptive")
      ->required()
      ->check(CLI::IsMember({"orthogonal", "two-pure", "tetrahedron", "unidentifiable", "commuting", "adaptive"}));
  reproduce->add_option("--m", o.m, "number of components (orthogonal)")->check(CLI::Range(2, 64))->capture_default_str();
  reproduce->add_option("--n", o.n, "number of copies (default depends on the case)")->check(CLI::PositiveNumber);
  reproduce->add_option("--epsilon", o.epsilon, "commuting example parameter in (0, 1]")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  reproduce->add_option("--theta", o.theta, "two-step angle in (0, pi)")
      ->check(CLI::Range(1e-9, M_PI - 1e-9))
      ->capture_default_str();
  reproduce->add_option("--lambda", o.lambda, "two-step true weight in (0, 1)")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9))
      ->capture_default_str();
  reproduce->add_option("--overlap", o.overlap, "tr rho1 rho2 for two-pure, in [0, 1)")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  add_common(reproduce, o);

  auto* bound = app.add_subcommand("bound", "error matrix and lower bounds for a mixture file");
  bound->add_option("file", o.file, "mixture file")->required()->check(CLI::ExistingFile);
  bound->add_option("--n-copies", o.n_copies, "number of copies")->check(CLI::PositiveNumber)->capture_default_str();
  bound->add_flag("--holevo", o.holevo, "also compute the Holevo bound");
  add_common(bound, o);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error of the posterior-mean estimator");
  simulate->add_option("file", o.file, "mixture file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--povm", o.povm_file, "POVM file")->check(CLI::ExistingFile);
  simulate->add_flag("--optimal", o.optimal, "use the SLD eigenbasis measurement");
  simulate->add_option("--n-copies", o.n_copies, "number of copies")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(simulate, o);

  CLI11_PARSE(app, argc, argv);

  try {
    RunReport rep = reproduce->parsed() ? cmd_reproduce(o) : bound->parsed() ? cmd_bound(o) : cmd_simulate(o);
    const std::string text = o.format == "csv" ? rep.to_csv() : rep.to_json();
    if (o.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(o.out);
      if (!f) throw ArgumentError("cannot write " + o.out);
      f << text;
    }
    return rep.all_pass() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
