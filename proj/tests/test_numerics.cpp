#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "hybridest/numerics.hpp"
#include "test_util.hpp"

using namespace hybridest;
using test_util::random_complex;
using test_util::random_hermitian;
using test_util::random_hpd;
using test_util::random_orthonormal_cols;

TEST_CASE("HermitianMatrix construction") {
  Eigen::MatrixXcd ok(2, 2);
  ok << 1.0, std::complex<double>(0.5, 0.25), std::complex<double>(0.5, -0.25), 2.0;
  CHECK_NOTHROW(HermitianMatrix{ok});

  Eigen::MatrixXcd skew(2, 2);
  skew << 1.0, std::complex<double>(0.5, 0.25), std::complex<double>(0.5, 0.25), 2.0;
  CHECK_THROWS_AS(HermitianMatrix{skew}, DomainError);

  CHECK_THROWS_AS(HermitianMatrix{Eigen::MatrixXcd::Zero(2, 3)}, DimensionError);
}

TEST_CASE("eigh identity and 2x2") {
  const EigenSystem id = eigh(HermitianMatrix::identity(2));
  CHECK(id.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.values(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((id.vectors.adjoint() * id.vectors - Eigen::MatrixXcd::Identity(2, 2)).norm() <=
        1e-10);

  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 0.5, 0.5, 1.0;
  const EigenSystem sys = eigh(HermitianMatrix{m});
  CHECK(sys.values(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sys.values(1) == doctest::Approx(0.5).epsilon(1e-12));
  Eigen::VectorXcd v0(2), v1(2);
  v0 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  v1 << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  CHECK(test_util::phase_aligned_diff(sys.vectors.col(0), v0) <= 1e-10);
  CHECK(test_util::phase_aligned_diff(sys.vectors.col(1), v1) <= 1e-10);
}

TEST_CASE("eigh residual and reconstruction on random Hermitian") {
  RngStream rng(42, 0, 1);
  for (int n : {8, 16, 64}) {
    const HermitianMatrix h = random_hermitian(rng, n);
    const EigenSystem sys = eigh(h);
    for (int k = 0; k + 1 < n; ++k) CHECK(sys.values(k) >= sys.values(k + 1));
    CHECK((sys.vectors.adjoint() * sys.vectors - Eigen::MatrixXcd::Identity(n, n))
              .norm() <= 1e-10);
    for (int k = 0; k < n; ++k) {
      const double residual =
          (h.entries() * sys.vectors.col(k) - sys.values(k) * sys.vectors.col(k)).norm();
      CHECK(residual <= 1e-9 * std::max(1.0, h.entries().norm()));
    }
    const Eigen::MatrixXcd recon =
        sys.vectors * sys.values.asDiagonal() * sys.vectors.adjoint();
    CHECK((h.entries() - recon).norm() / h.entries().norm() <= 1e-10);
  }
}

TEST_CASE("gen_eigh_pencil identity pencil equals eigh") {
  RngStream rng(7, 0, 2);
  const HermitianMatrix a = random_hermitian(rng, 5);
  const EigenSystem plain = eigh(a);
  const EigenSystem pencil = gen_eigh_pencil(a, HermitianMatrix::identity(5));
  CHECK((plain.values - pencil.values).cwiseAbs().maxCoeff() <= 1e-10);
  for (int k = 0; k < 5; ++k) {
    CHECK(test_util::phase_aligned_diff(plain.vectors.col(k), pencil.vectors.col(k)) <=
          1e-8);
  }
}

TEST_CASE("gen_eigh_pencil diagonal pencil") {
  Eigen::MatrixXcd a = Eigen::Vector2cd(4.0, 1.0).asDiagonal();
  Eigen::MatrixXcd b = Eigen::Vector2cd(2.0, 1.0).asDiagonal();
  const EigenSystem sys = gen_eigh_pencil(HermitianMatrix{a}, HermitianMatrix{b});
  CHECK(sys.values(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sys.values(1) == doctest::Approx(1.0).epsilon(1e-12));
  // Vectors are scaled identity columns (B-orthonormal).
  CHECK(std::abs(sys.vectors(1, 0)) <= 1e-12);
  CHECK(std::abs(sys.vectors(0, 1)) <= 1e-12);
  CHECK(std::abs(sys.vectors(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("gen_eigh_pencil residual and B-orthonormality") {
  RngStream rng(11, 0, 3);
  const int n = 6;
  const HermitianMatrix a = random_hermitian(rng, n);
  const HermitianMatrix b = random_hpd(rng, n);
  const EigenSystem sys = gen_eigh_pencil(a, b);
  const Eigen::MatrixXcd vbv = sys.vectors.adjoint() * b.entries() * sys.vectors;
  CHECK((vbv - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9);
  for (int k = 0; k < n; ++k) {
    const double residual = (a.entries() * sys.vectors.col(k) -
                             sys.values(k) * b.entries() * sys.vectors.col(k))
                                .norm();
    CHECK(residual <=
          1e-9 * (a.entries().norm() + std::abs(sys.values(k)) * b.entries().norm()));
  }

  const HermitianMatrix not_pd =
      HermitianMatrix::symmetrized(-Eigen::MatrixXcd::Identity(n, n));
  CHECK_THROWS_AS(gen_eigh_pencil(a, not_pd), DomainError);
}

TEST_CASE("block_grq examples") {
  const HermitianMatrix a{Eigen::MatrixXcd(Eigen::Vector2cd(4.0, 1.0).asDiagonal())};
  const HermitianMatrix b{Eigen::MatrixXcd(Eigen::Vector2cd(2.0, 1.0).asDiagonal())};
  const HermitianMatrix eye = HermitianMatrix::identity(2);

  Eigen::MatrixXcd e1 = Eigen::MatrixXcd::Zero(2, 1);
  e1(0, 0) = 1.0;
  CHECK(block_grq(e1, a, eye) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(block_grq(Eigen::MatrixXcd::Identity(2, 2), a, eye) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(block_grq(e1, a, b) == doctest::Approx(2.0).epsilon(1e-12));

  Eigen::MatrixXcd rank_deficient(2, 2);
  rank_deficient << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(block_grq(rank_deficient, a, eye), DomainError);
}

TEST_CASE("block_grq extremal property via enumeration") {
  RngStream rng(3, 0, 4);
  for (int n : {4, 6}) {
    const HermitianMatrix a = random_hermitian(rng, n);
    const HermitianMatrix b = random_hpd(rng, n);
    const EigenSystem sys = gen_eigh_pencil(a, b);
    const int t = 2;
    double best = -1e300;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        Eigen::MatrixXcd v(n, t);
        v.col(0) = sys.vectors.col(i);
        v.col(1) = sys.vectors.col(j);
        const double grq = block_grq(v, a, b);
        CHECK(grq == doctest::Approx(sys.values(i) + sys.values(j)).epsilon(1e-9));
        best = std::max(best, grq);
      }
    }
    const double top = sys.values(0) + sys.values(1);
    CHECK(best == doctest::Approx(top).epsilon(1e-9));
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::MatrixXcd v = random_orthonormal_cols(rng, n, t);
      CHECK(block_grq(v, a, b) <= top + 1e-9);
    }
  }
}

TEST_CASE("sqrt_psd") {
  CHECK((sqrt_psd(HermitianMatrix::identity(3)) - Eigen::MatrixXcd::Identity(3, 3))
            .norm() <= 1e-12);

  const HermitianMatrix d{Eigen::MatrixXcd(Eigen::Vector2cd(4.0, 1.0).asDiagonal())};
  const Eigen::MatrixXcd s = sqrt_psd(d);
  CHECK(std::abs(s(0, 0) - 2.0) <= 1e-12);
  CHECK(std::abs(s(1, 1) - 1.0) <= 1e-12);

  RngStream rng(5, 0, 5);
  const Eigen::MatrixXcd x = random_complex(rng, 8, 8);
  const HermitianMatrix psd = HermitianMatrix::symmetrized(x * x.adjoint());
  const Eigen::MatrixXcd root = sqrt_psd(psd);
  CHECK((root - root.adjoint()).norm() <= 1e-10);
  CHECK((root * root - psd.entries()).norm() / std::max(1.0, psd.entries().norm()) <=
        1e-9);
  CHECK(eigh(HermitianMatrix::symmetrized(root)).values.minCoeff() >= -1e-9);

  // Exponential-correlation instance reconstructs as well.
  Eigen::MatrixXcd corr(8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) corr(i, j) = std::pow(0.8, std::abs(i - j));
  }
  const HermitianMatrix r08{corr};
  const Eigen::MatrixXcd corr_root = sqrt_psd(r08);
  CHECK((corr_root * corr_root - r08.entries()).norm() /
            std::max(1.0, r08.entries().norm()) <= 1e-9);

  const HermitianMatrix indefinite{
      Eigen::MatrixXcd(Eigen::Vector2cd(1.0, -1e-3).asDiagonal())};
  CHECK_THROWS_AS(sqrt_psd(indefinite), DomainError);
}

TEST_CASE("majorizes") {
  Eigen::VectorXd x(2), y(2);
  x << 2, 0;
  y << 1, 1;
  CHECK(majorizes(x, y));
  CHECK_FALSE(majorizes(y, x));
  x << 1.5, 0.5;
  y << 1.2, 0.8;
  CHECK(majorizes(x, y));

  Eigen::VectorXd bad(3);
  bad << 1, 1, 1;
  CHECK_THROWS_AS(majorizes(x, bad), DimensionError);
  Eigen::VectorXd mismatch(2);
  mismatch << 1.0, 0.5;
  CHECK_THROWS_AS(majorizes(x, mismatch), DomainError);
}

TEST_CASE("majorizes is reflexive and transitive") {
  RngStream rng(9, 0, 6);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5;
    Eigen::VectorXd a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
      a(i) = rng.uniform();
      b(i) = rng.uniform();
      c(i) = rng.uniform();
    }
    a *= n / a.sum();
    b *= n / b.sum();
    c *= n / c.sum();
    CHECK(majorizes(a, a));
    if (majorizes(a, b) && majorizes(b, c)) CHECK(majorizes(a, c));
  }
}
