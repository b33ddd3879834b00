#include "umpire/linalg.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "umpire/rng.hpp"

using umpire::EmbeddingMatrix;
using umpire::GramMatrix;
using umpire::Rng;

TEST_CASE("gram of duplicate unit rows is the all-ones matrix") {
  Eigen::MatrixXd m(2, 3);
  m.row(0) << 1.0, 0.0, 0.0;
  m.row(1) << 1.0, 0.0, 0.0;
  Eigen::MatrixXd g = umpire::gram(EmbeddingMatrix(m)).matrix();
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g(1, 0) == g(0, 1));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gram of orthogonal unit rows is the identity") {
  Eigen::MatrixXd m(2, 3);
  m.row(0) << 1.0, 0.0, 0.0;
  m.row(1) << 0.0, 1.0, 0.0;
  Eigen::MatrixXd g = umpire::gram(EmbeddingMatrix(m)).matrix();
  CHECK((g - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram matches the double-loop dot-product oracle") {
  Rng rng(20260819);
  Eigen::MatrixXd phi = oracles::random_unit_rows(3, 5, rng);
  Eigen::MatrixXd g = umpire::gram(EmbeddingMatrix(phi)).matrix();
  Eigen::MatrixXd ref = oracles::gram_naive(phi);
  CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("embedding rows with mismatched dimensions are a structural error") {
  std::vector<Eigen::VectorXd> rows;
  rows.push_back(Eigen::Vector3d(1, 0, 0));
  rows.push_back(Eigen::Vector2d(0, 1));
  CHECK_THROWS_AS(EmbeddingMatrix::from_rows(rows), umpire::StructuralError);
}

TEST_CASE("off-norm rows are renormalized with a count, zero rows rejected") {
  Eigen::MatrixXd m(2, 2);
  m.row(0) << 1.001, 0.0;  // off by 1e-3, beyond the 1e-6 tolerance
  m.row(1) << 0.0, 1.0;
  int fixed = 0;
  EmbeddingMatrix e(m, &fixed);
  CHECK(fixed == 1);
  CHECK(e.matrix().row(0).norm() == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(EmbeddingMatrix{z}, umpire::ValidationError);
}

TEST_CASE("GramMatrix construction enforces symmetry and unit diagonal") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(GramMatrix{bad}, umpire::ValidationError);
  Eigen::MatrixXd bad_diag(2, 2);
  bad_diag << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(GramMatrix{bad_diag}, umpire::ValidationError);
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(GramMatrix{rect}, umpire::StructuralError);
}

TEST_CASE("logdet_jittered closed forms") {
  const double eps = 1e-8;
  CHECK(umpire::logdet_jittered(Eigen::Matrix2d::Identity().eval(), eps) ==
        doctest::Approx(2.0 * std::log1p(eps)).epsilon(1e-12));
  Eigen::Matrix2d ones;
  ones << 1, 1, 1, 1;
  // eigenvalues {2 + eps, eps}
  CHECK(umpire::logdet_jittered(ones.eval(), 0.25) ==
        doctest::Approx(std::log(0.25) + std::log(2.25)).epsilon(1e-12));
}

TEST_CASE("logdet_jittered matches the cofactor determinant oracle on 4x4") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd b(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) b(i, j) = rng.normal();
    Eigen::MatrixXd psd = b * b.transpose();
    double eps = 1e-3;
    double got = umpire::logdet_jittered(psd, eps);
    Eigen::MatrixXd jittered = psd + eps * Eigen::MatrixXd::Identity(4, 4);
    double want = std::log(oracles::det_cofactor(jittered));
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("logdet_jittered rejects bad inputs") {
  Eigen::Matrix2d g = Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(umpire::logdet_jittered(g.eval(), 0.0),
                  umpire::ValidationError);
  CHECK_THROWS_AS(umpire::logdet_jittered(g.eval(), -1.0),
                  umpire::ValidationError);
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(umpire::logdet_jittered(rect, 1.0),
                  umpire::StructuralError);
}

TEST_CASE("non-PSD input surfaces the offending leading minor") {
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;  // eigenvalues {3, -1}
  try {
    umpire::logdet_jittered(indefinite.eval(), 0.5);
    FAIL("expected NumericError");
  } catch (const umpire::NumericError& err) {
    CHECK(std::string(err.what()).find("minor 2") != std::string::npos);
  }
}

TEST_CASE("logdet_second_moment scalar and orthogonal closed forms") {
  const double eps = 1e-8;
  Eigen::MatrixXd one_row(1, 4);
  one_row << 0.5, 0.5, 0.5, 0.5;
  CHECK(umpire::logdet_second_moment(EmbeddingMatrix(one_row), eps) ==
        doctest::Approx(std::log1p(eps)).epsilon(1e-9));

  Eigen::MatrixXd ortho(2, 3);
  ortho.row(0) << 1, 0, 0;
  ortho.row(1) << 0, 1, 0;
  CHECK(umpire::logdet_second_moment(EmbeddingMatrix(ortho), eps) ==
        doctest::Approx(2.0 * std::log1p(eps)).epsilon(1e-9));
}

TEST_CASE("the two log-det paths agree across k < d and k > d") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(16));
    Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(64));
    EmbeddingMatrix phi(oracles::random_unit_rows(k, d, rng));
    double eps = trial % 2 == 0 ? 1e-8 : 1e-4;
    double a = umpire::logdet_jittered(umpire::gram(phi), eps);
    double b = umpire::logdet_second_moment(phi, eps);
    CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("log-det of a unit-row Gram stays inside the eigenvalue window") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(12));
    Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(24));
    EmbeddingMatrix phi(oracles::random_unit_rows(k, d, rng));
    double eps = 1e-8;
    double v = umpire::logdet_jittered(umpire::gram(phi), eps);
    double kk = static_cast<double>(k);
    CHECK(v >= kk * std::log(eps) - 1e-9);
    CHECK(v <= kk * std::log(kk + eps) + 1e-9);
  }
}

TEST_CASE("adding a PSD perturbation never shrinks the jittered log-det") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a(8, 8), b(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        a(i, j) = rng.normal();
        b(i, j) = rng.normal();
      }
    Eigen::MatrixXd sigma = a * a.transpose();
    Eigen::MatrixXd bump = b * b.transpose();
    double eps = 1e-8;
    double base = umpire::logdet_jittered(sigma, eps);
    double bumped = umpire::logdet_jittered((sigma + bump).eval(), eps);
    CHECK(bumped >= base);
  }
}
