#include <catch2/catch_amalgamated.hpp>

#include "ggm/linalg.hpp"
#include "ggm/rng.hpp"

using namespace ggm;

namespace {

Matrix random_spd(Eigen::Index p, Rng& rng, double jitter = 0.5) {
  Matrix a(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  }
  Matrix m = a * a.transpose() / static_cast<double>(p);
  m.diagonal().array() += jitter;
  return m;
}

}  // namespace

TEST_CASE("cholesky of the identity is the identity") {
  const Matrix m = Matrix::Identity(3, 3);
  const CholeskyFactor f = cholesky(m);
  REQUIRE((f.lower - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky reproduces the hand-worked 2x2 factor") {
  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const CholeskyFactor f = cholesky(m);
  CHECK(f.lower(0, 0) == Catch::Approx(2.0).margin(1e-14));
  CHECK(f.lower(1, 0) == Catch::Approx(1.0).margin(1e-14));
  CHECK(f.lower(1, 1) == Catch::Approx(std::sqrt(2.0)).margin(1e-14));
  CHECK(f.lower(0, 1) == 0.0);
  const Matrix rebuilt = f.lower * f.lower.transpose();
  CHECK((rebuilt - m).cwiseAbs().maxCoeff() < 1e-10 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3 and -1
  REQUIRE_THROWS_AS(cholesky(m), NotPositiveDefinite);
}

TEST_CASE("log_det matches closed forms") {
  CHECK(log_det(Matrix::Identity(5, 5)) == Catch::Approx(0.0).margin(1e-15));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 3.0;
  CHECK(log_det(d) == Catch::Approx(std::log(6.0)).margin(1e-14));

  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  CHECK(log_det(m) == Catch::Approx(std::log(8.0)).margin(1e-14));
}

TEST_CASE("spd_inverse matches closed forms") {
  CHECK((spd_inverse(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 4.0;
  const Matrix inv = spd_inverse(d);
  CHECK(inv(0, 0) == Catch::Approx(0.5).margin(1e-14));
  CHECK(inv(1, 1) == Catch::Approx(0.25).margin(1e-14));

  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  Matrix expected(2, 2);
  expected << 3.0 / 8.0, -2.0 / 8.0, -2.0 / 8.0, 4.0 / 8.0;
  CHECK((spd_inverse(m) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse round trip and log-det antisymmetry on random SPD input") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(10));
    const Matrix m = random_spd(p, rng);
    const Matrix back = spd_inverse(spd_inverse(m));
    CHECK((back - m).cwiseAbs().maxCoeff() <
          1e-7 * m.cwiseAbs().maxCoeff());
    CHECK(log_det(spd_inverse(m)) == Catch::Approx(-log_det(m)).margin(1e-9));
    CHECK((spd_inverse(m) * m - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("cholesky never succeeds with a forced negative eigenvalue") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(8));
    // Random orthogonal basis from the QR of a Gaussian matrix.
    Matrix a(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
    }
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
    Vector eigs(p);
    for (Eigen::Index i = 0; i < p; ++i) eigs(i) = 0.1 + rng.uniform01();
    eigs(static_cast<Eigen::Index>(rng.below(p))) = -0.5 * rng.uniform01() - 0.01;
    const Matrix m = q * eigs.asDiagonal() * q.transpose();
    CHECK_FALSE(is_spd((m + m.transpose()) / 2.0));
  }
}
