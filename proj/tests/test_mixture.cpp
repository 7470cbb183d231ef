#include <doctest.h>

#include <boost/math/special_functions/binomial.hpp>

#include "helpers.hpp"
#include "qmix/holevo.hpp"
#include "qmix/mixture.hpp"

using namespace qmix;

namespace {

GeneralizedMixture orthogonal_qubits() {
  return GeneralizedMixture::linear({testing::ket_state({1.0, 0.0}), testing::ket_state({0.0, 1.0})});
}

WeightVector random_weights(int m, SplitMix64& rng) { return WeightVector(sample_flat_simplex(m, rng)); }

}  // namespace

TEST_SUITE("mixture") {
  TEST_CASE("weight vector validation") {
    CHECK_THROWS_AS(WeightVector(Eigen::Vector2d(0.6, 0.6)), ArgumentError);
    CHECK_THROWS_AS(WeightVector(Eigen::Vector2d(-0.1, 1.1)), ArgumentError);
    CHECK(WeightVector::uniform(4)[2] == doctest::Approx(0.25));
  }

  TEST_CASE("polynomial arithmetic") {
    const Polynomial x = Polynomial::variable(2, 0);
    const Polynomial y = Polynomial::variable(2, 1);
    const Polynomial p = (x + y) * (x + y);
    CHECK(p.terms().size() == 3);
    CHECK(p(Eigen::Vector2d(0.3, 0.7)) == doctest::Approx(1.0));
    Polynomial q = x + x * -1.0;
    CHECK(q.terms().empty());
    CHECK(x.is_variable(0));
    CHECK_FALSE((x * 2.0).is_variable(0));
  }

  TEST_CASE("coefficients must sum to one") {
    const auto a = testing::ket_state({1.0, 0.0});
    const auto b = testing::ket_state({0.0, 1.0});
    CHECK_THROWS_AS(GeneralizedMixture({a, b}, {Polynomial::variable(2, 0), Polynomial::variable(2, 0)}),
                    ArgumentError);
    CHECK_THROWS_AS(GeneralizedMixture::linear({a, DensityMatrix::maximally_mixed(3)}), ArgumentError);
  }

  TEST_CASE("average state examples") {
    const auto mix = orthogonal_qubits();
    CHECK((average_state(mix, WeightVector::vertex(2, 0)).matrix() - mix.components()[0].matrix()).norm() == 0.0);
    CHECK((average_state(mix, WeightVector::uniform(2)).matrix() - CMatrix::Identity(2, 2) * 0.5).norm() < 1e-15);
    const auto tet = GeneralizedMixture::linear(tetrahedron_states());
    CHECK((average_state(tet, WeightVector::uniform(4)).matrix() - CMatrix::Identity(2, 2) * 0.5).norm() < 1e-12);
  }

  TEST_CASE("average state is affine for linear mixtures") {
    SplitMix64 rng(4);
    std::vector<DensityMatrix> comps;
    for (int r = 0; r < 4; ++r) comps.push_back(testing::random_state(3, rng));
    const auto mix = GeneralizedMixture::linear(comps);
    for (int t = 0; t < 20; ++t) {
      const auto w1 = random_weights(4, rng);
      const auto w2 = random_weights(4, rng);
      const double s = rng.uniform();
      const WeightVector mid(s * w1.values() + (1 - s) * w2.values(), 1e-12);
      const CMatrix lhs = average_state(mix, mid).matrix();
      const CMatrix rhs = s * average_state(mix, w1).matrix() + (1 - s) * average_state(mix, w2).matrix();
      CHECK((lhs - rhs).norm() < 1e-12);
    }
  }

  TEST_CASE("non-physical generalized mixture raises a model error") {
    const auto a = testing::ket_state({1.0, 0.0});
    const auto b = testing::ket_state({0.0, 1.0});
    // c = (2 x0 - x1 ... ) stays summing to one but turns negative on the simplex.
    Polynomial c0 = Polynomial::variable(2, 0) * 2.0;
    Polynomial c1 = Polynomial::variable(2, 1) + Polynomial::variable(2, 0) * -1.0;
    const GeneralizedMixture mix({a, b}, {c0, c1});
    CHECK_THROWS_AS(average_state(mix, WeightVector(Eigen::Vector2d(0.9, 0.1))), ModelError);
  }

  TEST_CASE("identifiability examples") {
    const auto r1 = identifiability(orthogonal_qubits());
    CHECK(r1.identifiable);
    CHECK(r1.kernel_basis.empty());

    const auto four = GeneralizedMixture::linear(four_state_unidentifiable());
    const auto r2 = identifiability(four);
    CHECK_FALSE(r2.identifiable);
    REQUIRE(r2.kernel_basis.size() == 1);
    const Eigen::VectorXd& v = r2.kernel_basis[0];
    CHECK(std::abs(v.sum()) < 1e-12);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(weighted_sum(four.components(), v).matrix().norm() < 1e-9);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    CHECK(v(arg) > 0);

    // Oracle: the Gram matrix of the tetrahedron states is nonsingular.
    const auto tet = tetrahedron_states();
    Eigen::Matrix4d gram;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) gram(i, j) = hs_inner(tet[i].hermitian(), tet[j].hermitian());
    CHECK(std::abs(gram.determinant()) > 1e-6);
    CHECK(identifiability(GeneralizedMixture::linear(tet)).identifiable);
  }

  TEST_CASE("duplicated components are never identifiable") {
    SplitMix64 rng(9);
    for (int t = 0; t < 5; ++t) {
      const auto a = testing::random_state(3, rng);
      const auto b = testing::random_state(3, rng);
      const auto rep = identifiability(GeneralizedMixture::linear({a, b, a}));
      CHECK_FALSE(rep.identifiable);
      CHECK(rep.kernel_basis.size() == 1);
    }
  }

  TEST_CASE("identifiability requires a linear mixture") {
    const auto two = multicopy_expand(orthogonal_qubits(), 2);
    CHECK_THROWS_AS(identifiability(two), PreconditionError);
  }

  TEST_CASE("occupation vectors") {
    const auto k = occupation_vectors(3, 2);
    REQUIRE(k.size() == 6);
    CHECK(k.front() == OccupationVector{2, 0, 0});
    CHECK(k[1] == OccupationVector{1, 1, 0});
    CHECK(k.back() == OccupationVector{0, 0, 2});
  }

  TEST_CASE("multicopy expansion examples") {
    const auto mix = orthogonal_qubits();
    const auto one = multicopy_expand(mix, 1);
    REQUIRE(one.size() == 2);
    for (int a = 0; a < 2; ++a) CHECK((one.components()[a].matrix() - mix.components()[a].matrix()).norm() == 0.0);

    const auto two = multicopy_expand(mix, 2);
    REQUIRE(two.size() == 3);
    const double l = 0.3;
    const Eigen::VectorXd c = two.coefficient_values(WeightVector(Eigen::Vector2d(l, 1 - l)));
    CHECK(c(0) == doctest::Approx(l * l));
    CHECK(c(1) == doctest::Approx(2 * l * (1 - l)));
    CHECK(c(2) == doctest::Approx((1 - l) * (1 - l)));

    const auto tri = GeneralizedMixture::linear({testing::ket_state({1.0, 0.0}), testing::ket_state({0.0, 1.0}),
                                                 DensityMatrix::maximally_mixed(2)});
    CHECK(multicopy_expand(tri, 2).size() == 6);
    CHECK_THROWS_AS(multicopy_expand(mix, 0), ArgumentError);
  }

  TEST_CASE("multicopy expansion matches the tensor power") {
    SplitMix64 rng(17);
    const auto mix = GeneralizedMixture::linear(
        {testing::random_state(2, rng), testing::random_state(2, rng), testing::random_pure(2, rng)});
    for (int n = 1; n <= 5; ++n) {
      const auto expanded = multicopy_expand(mix, n);
      const double count = boost::math::binomial_coefficient<double>(3 + n - 1, 2);
      CHECK(expanded.size() == static_cast<int>(count));
      const auto w = random_weights(3, rng);
      const HermitianMatrix single = average_state(mix, w).hermitian();
      HermitianMatrix power = single;
      for (int i = 1; i < n; ++i) power = tensor_product(power, single);
      CHECK((average_state(expanded, w).matrix() - power.matrix()).norm() < 1e-9);
    }
  }

  TEST_CASE("multicopy expansion honours the dimension cap") {
    const auto mix = orthogonal_qubits();
    CHECK_THROWS_AS(multicopy_expand(mix, 13), SizeError);
  }

  TEST_CASE("Bloch conversions") {
    CHECK((bloch_to_density(Eigen::Vector3d::Zero()).matrix() - CMatrix::Identity(2, 2) * 0.5).norm() == 0.0);
    const auto up = bloch_to_density(Eigen::Vector3d(0, 0, 1));
    CHECK(std::abs(up.matrix()(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(up.matrix()(1, 1)) < 1e-15);
    const Eigen::Vector3d n1 = Eigen::Vector3d(1, -1, -1) / std::sqrt(3.0);
    CHECK(std::abs(bloch_to_density(n1).purity() - 1.0) < 1e-12);
    SplitMix64 rng(2);
    for (int t = 0; t < 10; ++t) {
      const auto rho = testing::random_state(2, rng);
      CHECK((bloch_to_density(density_to_bloch(rho)).matrix() - rho.matrix()).norm() < 1e-12);
    }
    CHECK_THROWS_AS(bloch_to_density(Eigen::Vector3d(1, 1, 0)), ArgumentError);
  }

  TEST_CASE("zero-sum basis") {
    for (int m : {2, 3, 5}) {
      const Eigen::MatrixXd q = zero_sum_basis(m);
      CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(m - 1, m - 1)).norm() < 1e-12);
      CHECK((Eigen::RowVectorXd::Ones(m) * q).norm() < 1e-12);
    }
  }
}
