#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "strebm/errors.hpp"
#include "strebm/evaluation.hpp"
#include "strebm/synthdata.hpp"

using namespace strebm;
using namespace strebm::testing;

namespace {

void check_standardized(const Matrix& Y) {
  const double T = static_cast<double>(Y.rows());
  for (std::size_t c = 0; c < Y.cols(); ++c) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < Y.rows(); ++i) mean += Y(i, c);
    mean /= T;
    for (std::size_t i = 0; i < Y.rows(); ++i) ss += (Y(i, c) - mean) * (Y(i, c) - mean);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(std::sqrt(ss / T) - 1.0) <= 1e-6);
  }
}

}  // namespace

TEST_SUITE("synthdata") {
  TEST_CASE("generate_sources") {
    for (std::size_t T : {5u, 50u, 400u, 1000u}) {
      CAPTURE(T);
      const Matrix S = generate_sources(T);
      CHECK(S.rows() == T);
      CHECK(S.cols() == 3);
      check_standardized(S);
      CHECK(generate_sources(T) == S);
    }
    const Matrix S = generate_sources(1000);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b)
        CHECK(pearson_abs_corr(S.column(a), S.column(b)) <= 0.1);
    CHECK_THROWS_AS(generate_sources(1), InvalidArgument);
  }

  TEST_CASE("generate_sources on grids too short to resolve a waveform") {
    // On these grids the sawtooth or the sine repeats one value at every sample.
    // Such a column comes back as zeros, the others standardized.
    for (std::size_t T : {2u, 3u, 4u}) {
      CAPTURE(T);
      const Matrix S = generate_sources(T);
      std::size_t zero_columns = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        const Vector col = S.column(c);
        double ss = 0.0;
        for (double v : col) ss += v * v;
        if (ss == 0.0) ++zero_columns;
        else CHECK(ss / static_cast<double>(T) == doctest::Approx(1.0));
      }
      CHECK(zero_columns >= 1);
      CHECK(zero_columns < 3);
    }
  }

  TEST_CASE("generate_sources without smoothing gives the raw waveforms") {
    WaveformOptions raw;
    raw.square_smoothing = 0.0;
    raw.sawtooth_smoothing = 0.0;
    const Matrix S = generate_sources(101, raw);
    // An unsmoothed square wave takes at most three levels (+1, -1 and the
    // exact zeros of the sine), and the sawtooth wraps with jumps.
    Vector levels = S.column(1);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    CHECK(levels.size() <= 3);
    double max_step = 0.0;
    for (std::size_t i = 1; i < 101; ++i) max_step = std::max(max_step, std::abs(S(i, 2) - S(i - 1, 2)));
    CHECK(max_step > 2.0);
    CHECK(pearson_abs_corr(S.column(0), generate_sources(101).column(0)) == doctest::Approx(1.0));
    // Only the square wave is smoothed by default.
    CHECK(generate_sources(101).column(2) == S.column(2));
  }

  TEST_CASE("mix_linear examples") {
    const Matrix S = generate_sources(30);
    CHECK(mix_linear(S, Matrix::identity(3), 0.0, 1) == S);
    Matrix A = random_matrix(3, 3, 2);
    for (std::size_t q = 0; q < 3; ++q) A(1, q) = 0.0;
    const Matrix Y = mix_linear(S, A, 0.0, 1);
    for (std::size_t i = 0; i < 30; ++i) CHECK(Y(i, 1) == 0.0);
    CHECK_THROWS_AS(mix_linear(S, Matrix(3, 2), 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(mix_linear(S, A, -1.0, 1), InvalidArgument);
  }

  TEST_CASE("mix_linear is linear at zero noise") {
    const Matrix A = default_mixing_matrix(3, 3, 4);
    const Matrix S1 = random_matrix(20, 3, 5);
    const Matrix S2 = random_matrix(20, 3, 6);
    const double alpha = 1.7, beta = -0.4;
    Matrix comb(20, 3);
    for (std::size_t k = 0; k < comb.size(); ++k) comb.flat()[k] = alpha * S1.flat()[k] + beta * S2.flat()[k];
    const Matrix lhs = mix_linear(comb, A, 0.0, 1);
    const Matrix y1 = mix_linear(S1, A, 0.0, 1);
    const Matrix y2 = mix_linear(S2, A, 0.0, 1);
    for (std::size_t k = 0; k < lhs.size(); ++k)
      CHECK(std::abs(lhs.flat()[k] - (alpha * y1.flat()[k] + beta * y2.flat()[k])) <= 1e-13);
  }

  TEST_CASE("noise is seeded") {
    const Matrix S = generate_sources(40);
    const Matrix A = default_mixing_matrix(3, 3, 1);
    CHECK(mix_linear(S, A, 0.1, 9) == mix_linear(S, A, 0.1, 9));
    CHECK_FALSE(mix_linear(S, A, 0.1, 9) == mix_linear(S, A, 0.1, 10));
  }

  TEST_CASE("default mixing matrix is well conditioned and invertible") {
    for (std::uint64_t seed : {1u, 7u, 42u}) {
      const Matrix A = default_mixing_matrix(3, 3, seed);
      CHECK(default_mixing_matrix(3, 3, seed) == A);
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(A));
      const auto sv = svd.singularValues();
      CHECK(sv(0) / sv(2) <= 10.0);
      CHECK(sv(0) == doctest::Approx(1.0));
      CHECK(sv(2) == doctest::Approx(0.3));
      const Matrix S = generate_sources(200);
      const Eigen::MatrixXd Y = to_eigen(mix_linear(S, A, 0.0, seed));
      const Eigen::MatrixXd recovered = Y * to_eigen(A).completeOrthogonalDecomposition().pseudoInverse().transpose();
      CHECK((recovered - to_eigen(S)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    const Matrix tall = default_mixing_matrix(5, 3, 1);
    CHECK(tall.rows() == 5);
    CHECK(tall.cols() == 3);
  }

  TEST_CASE("mix_nonlinear examples") {
    const Matrix S = generate_sources(50);
    MlpParams zero{Matrix(8, 3), Vector(8, 0.0), Matrix(8, 8), Vector(8, 0.0), Matrix(3, 8),
                   Vector(3, 0.0), Activation::tanh};
    const Matrix mixed_zero = mix_nonlinear(S, GeneratorParams(zero), 0.0, 1);
    for (double v : mixed_zero.flat()) CHECK(v == 0.0);

    const GeneratorParams mlp = default_mixing_mlp(3, 3, 8, 7);
    CHECK(mix_nonlinear(S, mlp, 0.05, 2) == mix_nonlinear(S, mlp, 0.05, 2));
    for (auto t : mlp.tensors())
      for (double v : t) CHECK(std::abs(v) <= 1.0);

    // Near-linear regime: with tiny first-layer weights the output follows the
    // composed Jacobian at the origin.
    GeneratorParams small = mlp;
    for (double& v : small.mlp().W1.flat()) v *= 0.01;
    for (double& v : small.mlp().b1) v = 0.0;
    const Matrix Y = mix_nonlinear(S, small, 0.0, 1);
    const Eigen::MatrixXd W1 = to_eigen(small.mlp().W1);
    const Eigen::MatrixXd W2 = to_eigen(small.mlp().W2);
    const Eigen::MatrixXd W3 = to_eigen(small.mlp().W3);
    const Eigen::MatrixXd J = W3 * W2 * W1;
    const Eigen::MatrixXd lin = to_eigen(S) * J.transpose();
    for (std::size_t c = 0; c < 3; ++c) {
      const Eigen::VectorXd lc = lin.col(static_cast<Eigen::Index>(c));
      CHECK(pearson_abs_corr(Y.column(c), std::span<const double>(lc.data(), 50)) > 0.999);
    }
  }

  TEST_CASE("standardize") {
    const Matrix Z = standardize(Matrix{{0.0}, {2.0}});
    CHECK(Z(0, 0) == -1.0);
    CHECK(Z(1, 0) == 1.0);

    const Matrix R = random_matrix(80, 3, 11, 5.0);
    const Matrix S1 = standardize(R);
    check_standardized(S1);
    const Matrix S2 = standardize(S1);
    for (std::size_t k = 0; k < S1.size(); ++k) CHECK(std::abs(S2.flat()[k] - S1.flat()[k]) <= 1e-12);

    Matrix affine = R;
    for (std::size_t i = 0; i < 80; ++i) affine(i, 2) = 3.5 * R(i, 2) - 8.0;
    const Matrix S3 = standardize(affine);
    for (std::size_t i = 0; i < 80; ++i) CHECK(std::abs(S3(i, 2) - S1(i, 2)) <= 1e-12);

    Matrix constant = R;
    for (std::size_t i = 0; i < 80; ++i) constant(i, 1) = 4.0;
    CHECK_THROWS_AS(standardize(constant), InvalidArgument);
    CHECK_THROWS_AS(standardize(Matrix(1, 2)), InvalidArgument);
  }

  TEST_CASE("make_experiment") {
    ExperimentConfig c;
    c.T = 120;
    const Experiment lin = make_experiment(c);
    check_standardized(lin.observations);
    CHECK(lin.sources == generate_sources(120));
    CHECK(lin.mixing_matrix.rows() == 3);
    CHECK(make_experiment(c).observations == lin.observations);

    c.mixing = MixingKind::nonlinear;
    c.noise_std = 0.01;
    const Experiment nl = make_experiment(c);
    check_standardized(nl.observations);
    CHECK(nl.mixing_mlp.kind() == GeneratorKind::mlp);
    CHECK(make_experiment(c).observations == nl.observations);

    c.T = 1;
    CHECK_THROWS_AS(make_experiment(c), InvalidArgument);
  }

  TEST_CASE("mixing kind names round-trip") {
    CHECK(parse_mixing_kind("linear") == MixingKind::linear);
    CHECK(parse_mixing_kind(to_string(MixingKind::nonlinear)) == MixingKind::nonlinear);
    CHECK_THROWS_AS(parse_mixing_kind("quadratic"), InvalidArgument);
  }
}
