#include <doctest.h>

#include <boost/math/special_functions/binomial.hpp>

#include "helpers.hpp"
#include "qmix/holevo.hpp"
#include "qmix/simplex.hpp"

using namespace qmix;

namespace {

Polynomial one_minus_sum_squares(int m) {
  Polynomial p = Polynomial::constant(m, 1.0);
  for (int r = 0; r < m; ++r) p += Polynomial::variable(m, r) * Polynomial::variable(m, r) * -1.0;
  return p;
}

double one_minus_sum_squares_fn(const WeightVector& w) { return 1.0 - w.values().squaredNorm(); }

GeneralizedMixture generic_linear(int m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<DensityMatrix> comps;
  for (int r = 0; r < m; ++r) comps.push_back(testing::random_state(2, rng));
  return GeneralizedMixture::linear(comps);
}

}  // namespace

TEST_SUITE("simplex") {
  TEST_CASE("Dirichlet moments") {
    CHECK(dirichlet_moment({1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(dirichlet_moment({1, 1, 0}) == doctest::Approx(1.0 / 24).epsilon(1e-15));
    for (int m = 1; m <= 6; ++m) {
      CHECK(std::tgamma(m) * dirichlet_moment(Exponents(m, 0)) == doctest::Approx(1.0).epsilon(1e-15));
    }
    // Exact and log-Gamma branches agree across the switch-over.
    const double exact = dirichlet_moment({20, 19, 0});   // 41 - 1 = 40
    const double approx = dirichlet_moment({20, 20, 0});  // beyond 40
    CHECK(approx / exact == doctest::Approx(20.0 / 42.0).epsilon(1e-10));
  }

  TEST_CASE("flat averages of polynomials") {
    for (int m = 2; m <= 5; ++m) {
      CHECK(flat_average(Polynomial::variable(m, 0)) == doctest::Approx(1.0 / m).epsilon(1e-14));
      CHECK(flat_average(one_minus_sum_squares(m)) == doctest::Approx((m - 1.0) / (m + 1.0)).epsilon(1e-14));
    }
    const Polynomial x = Polynomial::variable(2, 0);
    CHECK(flat_average(x * x) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }

  TEST_CASE("Kuhn centroids tile the unit cube") {
    for (int d = 1; d <= 4; ++d) {
      const auto offs = detail::kuhn_centroid_offsets(d);
      CHECK(offs.size() == static_cast<std::size_t>(std::tgamma(d + 1) + 0.5));
      // The centroids of the d! Kuhn simplices average to the cube centre.
      for (int a = 0; a < d; ++a) {
        double s = 0;
        for (const auto& o : offs) s += o[a];
        CHECK(s / offs.size() == doctest::Approx(0.5));
      }
    }
  }

  TEST_CASE("quadrature examples") {
    for (int m = 1; m <= 4; ++m) {
      const double v = simplex_quadrature<double>(m, [](const WeightVector&) { return 1.0; }, 20);
      CHECK(std::abs(v - 1.0) < 1e-12);
    }
    const double q = simplex_quadrature<double>(4, one_minus_sum_squares_fn, kDefaultResolution);
    CHECK(std::abs(q - 0.6) < 1e-4);
    auto im_part = [](const WeightVector& w) {
      double s = 0;
      for (int r = 0; r < 3; ++r) s += (w[3] - w[r]) * (w[3] - w[r]);
      return std::sqrt(3.0) / 2.0 * std::sqrt(s);
    };
    const double t = simplex_quadrature<double>(4, im_part, kDefaultResolution);
    CHECK(std::abs(t - 0.43) < 5e-3);
    CHECK_THROWS_AS(simplex_quadrature<double>(3, one_minus_sum_squares_fn, 1), ArgumentError);
  }

  TEST_CASE("quadrature refinement converges monotonically") {
    for (int m = 2; m <= 4; ++m) {
      const double exact = (m - 1.0) / (m + 1.0);
      double prev = 1e9;
      for (int res : {5, 10, 20, 40}) {
        const double err = std::abs(simplex_quadrature<double>(m, one_minus_sum_squares_fn, res) - exact);
        CHECK(err <= prev);
        prev = err;
      }
      const Polynomial cube = Polynomial::variable(m, 0) * Polynomial::variable(m, 0) * Polynomial::variable(m, 0);
      const double exact3 = flat_average(cube);
      prev = 1e9;
      for (int res : {5, 10, 20, 40}) {
        const double err = std::abs(
            simplex_quadrature<double>(m, [](const WeightVector& w) { return std::pow(w[0], 3); }, res) - exact3);
        CHECK(err <= prev);
        prev = err;
      }
    }
    // Default resolution: doubling changes the test integral by less than 1e-3.
    const double a = simplex_quadrature<double>(3, one_minus_sum_squares_fn, kDefaultResolution);
    const double b = simplex_quadrature<double>(3, one_minus_sum_squares_fn, 2 * kDefaultResolution);
    CHECK(std::abs(a - b) < 1e-3);
  }

  TEST_CASE("quadrature is independent of the thread count") {
    auto f = [](const WeightVector& w) { return std::sin(3 * w[0]) + w[1] * w[2]; };
    const double one = simplex_quadrature<double>(3, f, 60, 0.0, 1);
    const double four = simplex_quadrature<double>(3, f, 60, 0.0, 4);
    CHECK(one == four);
  }

  TEST_CASE("flat prior moments") {
    const auto mix2 = generic_linear(2, 1);
    const auto pm = prior_moments(Prior::flat(2), mix2);
    CHECK(pm.covariance(0, 0) == doctest::Approx(1.0 / 12).epsilon(1e-14));
    CHECK(pm.cross[0](0) == doctest::Approx(1.0 / 12).epsilon(1e-14));

    const auto pm3 = prior_moments(Prior::flat(3), generic_linear(3, 2));
    for (int a = 0; a < 3; ++a) CHECK(pm3.coefficient_means(a) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s)
        CHECK(pm3.covariance(r, s) == doctest::Approx(((r == s) - 1.0 / 3) / 12.0).epsilon(1e-14));
    CHECK((pm3.covariance * Eigen::VectorXd::Ones(3)).norm() < 1e-12);
    validate_moments(pm3);
  }

  TEST_CASE("closed-form multicopy moments match generic integration") {
    for (int m = 2; m <= 4; ++m) {
      for (int n = 1; n <= 4; ++n) {
        const auto mix = multicopy_expand(generic_linear(m, 100 + m), n);
        const auto generic = prior_moments(Prior::flat(m), mix);
        const auto closed = flat_multicopy_moments(m, n);
        CHECK((generic.mean - closed.mean).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((generic.covariance - closed.covariance).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(generic.cross.size() == closed.cross.size());
        for (std::size_t a = 0; a < closed.cross.size(); ++a) {
          CHECK((generic.cross[a] - closed.cross[a]).cwiseAbs().maxCoeff() < 1e-12);
          const double c = 1.0 / boost::math::binomial_coefficient<double>(n + m - 1, n);
          CHECK(closed.coefficient_means(static_cast<Index>(a)) == doctest::Approx(c).epsilon(1e-13));
        }
        validate_moments(closed);
      }
    }
  }

  TEST_CASE("Dirichlet priors") {
    const Prior flat = Prior::dirichlet({1, 1, 1});
    CHECK(flat.kind() == Prior::Kind::flat);
    const Prior d = Prior::dirichlet({2, 1});
    // Beta(2,1): mean 2/3, variance 2/(9*4) = 1/18.
    const auto pm = prior_moments(d, generic_linear(2, 4));
    CHECK(pm.mean(0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(pm.covariance(0, 0) == doctest::Approx(1.0 / 18).epsilon(1e-14));
    const double q = d.average<double>([](const WeightVector& w) { return w[0]; }, 200);
    CHECK(q == doctest::Approx(2.0 / 3).epsilon(1e-4));
    CHECK_THROWS_AS(Prior::dirichlet({1, 0}), ArgumentError);
  }

  TEST_CASE("custom priors are checked, not renormalized") {
    // Beta(2,1) density 2 lambda_1 written as a custom prior.
    const Prior c = Prior::custom(2, [](const WeightVector& w) { return 2.0 * w[0]; }, 200);
    const auto pm = prior_moments(c, generic_linear(2, 4));
    CHECK(pm.mean(0) == doctest::Approx(2.0 / 3).epsilon(1e-4));
    CHECK(pm.covariance(0, 0) == doctest::Approx(1.0 / 18).epsilon(1e-3));
    CHECK_THROWS_AS(Prior::custom(2, [](const WeightVector&) { return 2.0; }), ArgumentError);
  }
}
