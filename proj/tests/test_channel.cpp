#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridest/channel.hpp"
#include "test_util.hpp"

using namespace hybridest;

TEST_CASE("exp_covariance basics") {
  const SpatialCovariance iid = exp_covariance(4, 0.0);
  CHECK((iid.matrix().entries() - Eigen::MatrixXcd::Identity(4, 4)).norm() <= 1e-12);

  const SpatialCovariance c = exp_covariance(2, 0.5);
  CHECK(std::abs(c.matrix().entries()(0, 1) - 0.5) <= 1e-12);
  CHECK(c.eig().values(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(c.eig().values(1) == doctest::Approx(0.5).epsilon(1e-12));

  const SpatialCovariance big = exp_covariance(64, 0.8);
  CHECK(std::real(big.matrix().entries().trace()) == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(big.eig().values.minCoeff() > 0.0);
  for (int i = 0; i + 1 < 64; ++i) CHECK(big.eig().values(i) >= big.eig().values(i + 1));

  CHECK_THROWS_AS(exp_covariance(4, 1.0), DomainError);
  CHECK_THROWS_AS(exp_covariance(4, -0.1), DomainError);
  CHECK_THROWS_AS(exp_covariance(0, 0.5), DomainError);
}

TEST_CASE("exp_covariance dispersion grows with a") {
  for (int m : {4, 8, 16}) {
    const Eigen::VectorXd l3 = exp_covariance(m, 0.3).eig().values;
    const Eigen::VectorXd l6 = exp_covariance(m, 0.6).eig().values;
    const Eigen::VectorXd l9 = exp_covariance(m, 0.9).eig().values;
    CHECK(majorizes(l6, l3));
    CHECK(majorizes(l9, l6));
  }
}

TEST_CASE("ray_covariance") {
  const SpatialCovariance broadside = ray_covariance(4, 1, 0.0, 0.0, 1);
  CHECK(broadside.eig().values(0) == doctest::Approx(4.0).epsilon(1e-9));
  for (int i = 1; i < 4; ++i) CHECK(std::abs(broadside.eig().values(i)) <= 1e-9);

  const SpatialCovariance narrow = ray_covariance(8, 2, 0.02, 0.3, 5);
  const SpatialCovariance wide = ray_covariance(8, 8, M_PI, 0.0, 5);
  CHECK(std::real(narrow.matrix().entries().trace()) ==
        doctest::Approx(8.0).epsilon(1e-9));
  CHECK(std::real(wide.matrix().entries().trace()) == doctest::Approx(8.0).epsilon(1e-9));
  // Few concentrated paths give a more spread (majorizing) spectrum.
  CHECK(majorizes(narrow.eig().values, wide.eig().values));

  // Rank is bounded by the number of paths.
  const SpatialCovariance two_paths = ray_covariance(8, 2, 0.1, 0.2, 9);
  CHECK(two_paths.eig().values(2) <= 1e-9);

  CHECK_THROWS_AS(ray_covariance(8, 0, 0.1, 0.0, 1), DomainError);
}

TEST_CASE("sample_channel identity covariance returns the raw draw") {
  const SpatialCovariance iid = exp_covariance(6, 0.0);
  RngStream rng(123, 0, purpose::channel);
  const ChannelRealization g = sample_channel(iid, rng);
  RngStream replay(123, 0, purpose::channel);
  const Eigen::VectorXcd h = replay.cgaussian_vector(6);
  CHECK((g.g - h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sample_channel determinism") {
  const SpatialCovariance cov = exp_covariance(8, 0.7);
  RngStream r1(99, 5, purpose::channel);
  RngStream r2(99, 5, purpose::channel);
  const ChannelRealization a = sample_channel(cov, r1);
  const ChannelRealization b = sample_channel(cov, r2);
  CHECK(a.g == b.g);  // byte-identical
}

TEST_CASE("sample covariance converges to R") {
  const int m = 8;
  const SpatialCovariance cov = exp_covariance(m, 0.8);
  const long n_small = 10000, n_large = 100000;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
  double err_small = 0.0;
  for (long i = 0; i < n_large; ++i) {
    RngStream rng(2024, static_cast<std::uint64_t>(i), purpose::channel);
    const ChannelRealization g = sample_channel(cov, rng);
    acc.noalias() += g.g * g.g.adjoint();
    if (i + 1 == n_small) {
      err_small = (acc / static_cast<double>(n_small) - cov.matrix().entries()).norm() /
                  cov.matrix().entries().norm();
    }
  }
  const double err_large =
      (acc / static_cast<double>(n_large) - cov.matrix().entries()).norm() /
      cov.matrix().entries().norm();
  CHECK(err_large <= 0.02);
  // O(1/sqrt(N)): a factor-10 sample increase shrinks the error roughly sqrt(10)-fold.
  CHECK(err_small / err_large >= 1.5);
  CHECK(err_small / err_large <= 6.5);
}

TEST_CASE("E{|g|^2} = M") {
  const int m = 16;
  const SpatialCovariance cov = exp_covariance(m, 0.6);
  double acc = 0.0;
  const long n = 20000;
  for (long i = 0; i < n; ++i) {
    RngStream rng(5, static_cast<std::uint64_t>(i), purpose::channel);
    acc += sample_channel(cov, rng).g.squaredNorm();
  }
  CHECK(acc / static_cast<double>(n) == doctest::Approx(m).epsilon(0.03));
}

TEST_CASE("more_correlated") {
  const SpatialCovariance c9 = exp_covariance(8, 0.9);
  const SpatialCovariance c5 = exp_covariance(8, 0.5);
  const SpatialCovariance c0 = exp_covariance(8, 0.0);
  CHECK(more_correlated(c9, c5));
  CHECK(more_correlated(c5, c5));
  CHECK_FALSE(more_correlated(c0, c5));
  CHECK_THROWS_AS(more_correlated(c9, exp_covariance(4, 0.5)), DimensionError);
}

TEST_CASE("SpatialCovariance rejects unnormalized input") {
  CHECK_THROWS_AS(
      SpatialCovariance{HermitianMatrix{2.0 * Eigen::MatrixXcd::Identity(4, 4)}},
      DomainError);
  CHECK_NOTHROW(SpatialCovariance::normalized(
      HermitianMatrix{2.0 * Eigen::MatrixXcd::Identity(4, 4)}));
}
