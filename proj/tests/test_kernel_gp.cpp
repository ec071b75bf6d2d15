#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "strebm/errors.hpp"
#include "strebm/kernel_gp.hpp"

using namespace strebm;
using namespace strebm::testing;

TEST_SUITE("kernel_gp") {
  TEST_CASE("normalized_index") {
    CHECK(normalized_index(1).values()[0] == 0.0);
    const IndexGrid g2 = normalized_index(2);
    CHECK(g2[0] == 0.0);
    CHECK(g2[1] == 1.0);
    const IndexGrid g5 = normalized_index(5);
    const double want[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(g5[i] == want[i]);
    CHECK_THROWS_AS(normalized_index(0), InvalidArgument);
    const IndexGrid g = normalized_index(997);
    CHECK(g[0] == 0.0);
    CHECK(g[996] == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] >= g[i - 1]);
  }

  TEST_CASE("IndexGrid rejects bad input") {
    CHECK_THROWS_AS(IndexGrid(Vector{}), InvalidArgument);
    CHECK_THROWS_AS(IndexGrid(Vector{0.5, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(IndexGrid(Vector{0.0, 1.5}), InvalidArgument);
    CHECK_THROWS_AS(IndexGrid(Vector{-0.1, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(IndexGrid(Vector{0.0, NAN}), InvalidArgument);
    CHECK_NOTHROW(IndexGrid(Vector{0.3, 0.3}));
  }

  TEST_CASE("KernelSpec validation") {
    CHECK_NOTHROW(KernelSpec{}.validate());
    CHECK_THROWS_AS((KernelSpec{0.0, 1e-5, 0.1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((KernelSpec{1.0, -1e-5, 0.1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((KernelSpec{1.0, 1e-5, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((KernelSpec{1.0, 1e-5, INFINITY}.validate()), InvalidArgument);
    CHECK_THROWS_AS((KernelSpec{NAN, 1e-5, 0.1}.validate()), InvalidArgument);
  }

  TEST_CASE("build_rbf_covariance examples") {
    const Matrix K1 = build_rbf_covariance(normalized_index(1), KernelSpec{1.0, 1e-5, 0.3});
    CHECK(K1(0, 0) == doctest::Approx(1.00001).epsilon(1e-14));

    const Matrix K2 = build_rbf_covariance(normalized_index(2), KernelSpec{1.0, 0.0, 1.0});
    CHECK(K2(0, 1) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(K2(0, 1) == std::exp(-0.5));
    CHECK(K2(0, 0) == 1.0);

    const Matrix Kc = build_rbf_covariance(IndexGrid(Vector{0.3, 0.3}), KernelSpec{1.0, 1e-5, 0.1});
    CHECK(Kc(0, 0) == doctest::Approx(1.00001).epsilon(1e-14));
    CHECK(Kc(0, 1) == 1.0);
    CHECK(Kc(1, 0) == 1.0);
  }

  TEST_CASE("covariance is exactly symmetric with the stated diagonal") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const IndexGrid grid = random_grid(40, seed);
      const KernelSpec spec{1.7, 1e-4, 0.05 + 0.1 * static_cast<double>(seed)};
      const Matrix K = build_rbf_covariance(grid, spec);
      for (std::size_t i = 0; i < K.rows(); ++i) {
        CHECK(K(i, i) == spec.amplitude + spec.jitter);
        for (std::size_t r = 0; r < K.cols(); ++r) CHECK(K(i, r) == K(r, i));
      }
    }
  }

  TEST_CASE("cholesky examples") {
    const CholFactor I3 = cholesky(Matrix::identity(3));
    CHECK(I3.lower() == Matrix::identity(3));

    const CholFactor f = cholesky(Matrix{{4.0, 2.0}, {2.0, 3.0}});
    CHECK(f.lower()(0, 0) == 2.0);
    CHECK(f.lower()(0, 1) == 0.0);
    CHECK(f.lower()(1, 0) == 1.0);
    CHECK(f.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(cholesky(Matrix{{1.0, 2.0}, {2.0, 1.0}}), NotPositiveDefinite);
    try {
      cholesky(Matrix{{1.0, 2.0}, {2.0, 1.0}});
    } catch (const NotPositiveDefinite& e) {
      CHECK(e.pivot() == 1);
    }
    CHECK_THROWS_AS(cholesky(Matrix(2, 3)), InvalidArgument);
  }

  TEST_CASE("cholesky reconstructs RBF covariances up to T = 128") {
    for (std::size_t T : {1u, 2u, 5u, 17u, 64u, 128u}) {
      for (double ell : {0.01, 0.1, 0.5, 2.0}) {
        CAPTURE(T);
        CAPTURE(ell);
        const Matrix K = build_rbf_covariance(normalized_index(T), KernelSpec{1.0, 1e-5, ell});
        CholFactor f;
        REQUIRE_NOTHROW(f = cholesky(K));
        const Eigen::MatrixXd L = to_eigen(f.lower());
        const Eigen::MatrixXd Ke = to_eigen(K);
        CHECK((L * L.transpose() - Ke).norm() <= 1e-10 * Ke.norm());
        for (std::size_t i = 0; i < T; ++i) {
          CHECK(f.diagonal(i) > 0.0);
          for (std::size_t j = i + 1; j < T; ++j) CHECK(f.lower()(i, j) == 0.0);
        }
        CHECK(cholesky(K).lower() == f.lower());
      }
    }
  }

  TEST_CASE("cholesky matches the dense oracle factor") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const std::size_t T = 1 + seed;
      const Matrix K = random_spd(T, seed);
      const Eigen::MatrixXd Lo = Eigen::LLT<Eigen::MatrixXd>(to_eigen(K)).matrixL();
      CHECK((to_eigen(cholesky(K).lower()) - Lo).norm() <= 1e-12 * Lo.norm());
    }
  }

  TEST_CASE("log_determinant examples and oracle") {
    CHECK(log_determinant(CholFactor(Matrix::identity(4))) == 0.0);
    CHECK(log_determinant(CholFactor(Matrix{{2.0, 0.0}, {0.0, 3.0}})) ==
          doctest::Approx(3.583519).epsilon(1e-6));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix K = random_spd(6, 40 + seed);
      CHECK(rel_err(log_determinant(cholesky(K)), std::log(to_eigen(K).determinant())) <= 1e-9);
    }
    for (std::size_t T = 2; T <= 32; T += 5) {
      const Matrix K = build_rbf_covariance(random_grid(T, T), KernelSpec{1.0, 1e-2, 0.3});
      CHECK(rel_err(log_determinant(cholesky(K)), std::log(to_eigen(K).determinant())) <= 1e-8);
    }
  }

  TEST_CASE("solve_and_quadform examples and oracle") {
    const Vector s{1.0, -2.0, 0.5};
    const SolveResult id = solve_and_quadform(cholesky(Matrix::identity(3)), s);
    for (std::size_t i = 0; i < 3; ++i) CHECK(id.alpha[i] == s[i]);
    CHECK(id.quad == doctest::Approx(5.25));

    const CholFactor f = cholesky(random_spd(8, 3));
    const SolveResult zero = solve_and_quadform(f, Vector(8, 0.0));
    for (double a : zero.alpha) CHECK(a == 0.0);
    CHECK(zero.quad == 0.0);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix K = random_spd(8, 60 + seed);
      const Vector v = random_vector(8, 70 + seed);
      const SolveResult r = solve_and_quadform(cholesky(K), v);
      const Eigen::MatrixXd Kinv = to_eigen(K).inverse();
      const Eigen::VectorXd alpha = Kinv * to_eigen(v);
      CHECK(max_rel_err(r.alpha, std::span<const double>(alpha.data(), 8), 1e-9) <= 1e-9);
      CHECK(rel_err(r.quad, to_eigen(v).dot(alpha)) <= 1e-9);
      CHECK(r.quad >= 0.0);
    }
    CHECK_THROWS_AS(solve_and_quadform(f, Vector(3, 1.0)), InvalidArgument);
  }

  TEST_CASE("kernel_lengthscale_derivative examples and finite differences") {
    const Matrix d2 = kernel_lengthscale_derivative(normalized_index(2), KernelSpec{1.0, 0.0, 1.0});
    CHECK(d2(0, 1) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(d2(0, 0) == 0.0);
    CHECK(d2(1, 1) == 0.0);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const IndexGrid grid = random_grid(20, 80 + seed);
      const KernelSpec spec{1.3, 1e-5, 0.08 + 0.2 * static_cast<double>(seed)};
      const Matrix dK = kernel_lengthscale_derivative(grid, spec);
      const double h = 1e-6;
      KernelSpec plus = spec, minus = spec;
      plus.length_scale += h;
      minus.length_scale -= h;
      const Matrix Kp = build_rbf_covariance(grid, plus);
      const Matrix Km = build_rbf_covariance(grid, minus);
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK(dK(i, i) == 0.0);
        for (std::size_t r = 0; r < 20; ++r) {
          CHECK(dK(i, r) == dK(r, i));
          CHECK(std::abs(dK(i, r) - (Kp(i, r) - Km(i, r)) / (2.0 * h)) <= 1e-5);
        }
      }
    }
  }

  TEST_CASE("triangular inverse and trace product match dense oracles") {
    for (std::size_t T : {1u, 2u, 4u, 7u, 9u, 16u, 31u}) {
      CAPTURE(T);
      const Matrix K = random_spd(T, 500 + T);
      const CholFactor f = cholesky(K);
      const Eigen::MatrixXd Linv = to_eigen(f.lower()).inverse();
      CHECK((to_eigen(f.inverse_transposed()) - Linv.transpose()).norm() <= 1e-12 * Linv.norm());

      Matrix B = random_matrix(T, T, 600 + T);
      B = matmul(B, B.transposed());
      const double want = (to_eigen(K).inverse() * to_eigen(B)).trace();
      CHECK(rel_err(inverse_trace_product(f, B), want) <= 1e-10);
    }
  }

  TEST_CASE("triangular solves invert the factor") {
    const Matrix K = random_spd(9, 77);
    const CholFactor f = cholesky(K);
    const Vector v = random_vector(9, 78);
    Vector x = v;
    f.forward_solve(x);
    const Eigen::VectorXd back = to_eigen(f.lower()) * to_eigen(x);
    CHECK(max_rel_err(std::span<const double>(back.data(), 9), v) <= 1e-12);
    Vector y = v;
    f.backward_solve(y);
    const Eigen::VectorXd back_t = to_eigen(f.lower()).transpose() * to_eigen(y);
    CHECK(max_rel_err(std::span<const double>(back_t.data(), 9), v) <= 1e-12);
  }

  TEST_CASE("CholFactor validates its input") {
    CHECK_THROWS_AS(CholFactor(Matrix{{1.0, 1.0}, {0.0, 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(CholFactor(Matrix{{0.0, 0.0}, {1.0, 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(CholFactor(Matrix(2, 3)), InvalidArgument);
  }
}
