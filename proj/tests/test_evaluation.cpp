#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "strebm/errors.hpp"
#include "strebm/evaluation.hpp"
#include "strebm/synthdata.hpp"

using namespace strebm;
using namespace strebm::testing;

TEST_SUITE("evaluation") {
  TEST_CASE("pearson_abs_corr examples") {
    const Vector a{1.0, 2.0, 3.0, 4.0};
    CHECK(pearson_abs_corr(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    const Vector neg{-1.0, -2.0, -3.0, -4.0};
    CHECK(pearson_abs_corr(a, neg) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson_abs_corr(a, Vector{1.0, 2.0, 3.0, 5.0}) == doctest::Approx(0.982708).epsilon(1e-6));
    CHECK_THROWS_AS(pearson_abs_corr(a, Vector{2.0, 2.0, 2.0, 2.0}), UndefinedCorrelation);
    CHECK_THROWS_AS(pearson_abs_corr(a, Vector{1.0, 2.0}), InvalidArgument);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Vector x = random_vector(10, seed);
      const Vector y = random_vector(10, seed + 100);
      const double r = pearson_abs_corr(x, y);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }

  TEST_CASE("permutation_match examples") {
    const Matrix S = generate_sources(100);
    const MatchReport self = permutation_match(S, S);
    CHECK(self.permutation == std::vector<std::size_t>{0, 1, 2});
    CHECK(self.mean_abs_corr == doctest::Approx(1.0).epsilon(1e-14));

    // Column i of the estimate is true column (i + 1) mod 3, one of them negated.
    Matrix shifted(100, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      Vector col = S.column((i + 1) % 3);
      if (i == 1) for (double& v : col) v = -v;
      shifted.set_column(i, col);
    }
    const MatchReport r = permutation_match(shifted, S);
    CHECK(r.permutation == std::vector<std::size_t>{1, 2, 0});
    CHECK(r.mean_abs_corr == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("permutation_match invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix truth = random_matrix(40, 3, seed);
      Matrix est = random_matrix(40, 3, seed + 50, 0.5);
      for (std::size_t k = 0; k < est.size(); ++k) est.flat()[k] += truth.flat()[k];
      const MatchReport base = permutation_match(est, truth);

      std::vector<std::size_t> sorted = base.permutation;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
      const double mean =
          std::accumulate(base.per_pair_abs_corr.begin(), base.per_pair_abs_corr.end(), 0.0) / 3.0;
      CHECK(base.mean_abs_corr == doctest::Approx(mean).epsilon(1e-15));

      Matrix transformed(40, 3);
      const double scale[] = {-2.0, 0.3, 5.0};
      for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 3; ++j) transformed(i, (j + 2) % 3) = scale[j] * est(i, j);
      CHECK(permutation_match(transformed, truth).mean_abs_corr ==
            doctest::Approx(base.mean_abs_corr).epsilon(1e-12));
    }
  }

  TEST_CASE("noise degrades the score monotonically on average") {
    const Matrix truth = generate_sources(300);
    double previous = 1.0 + 1e-12;
    for (double sigma : {0.0, 0.2, 0.5, 1.0, 2.0}) {
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix est = truth;
        const Matrix noise = random_matrix(300, 3, 1000 + seed, sigma);
        for (std::size_t k = 0; k < est.size(); ++k) est.flat()[k] += noise.flat()[k];
        total += permutation_match(est, truth).mean_abs_corr;
      }
      const double avg = total / 5.0;
      CHECK(avg <= previous);
      previous = avg;
    }
  }

  TEST_CASE("permutation_match errors") {
    const Matrix S = random_matrix(10, 3, 1);
    CHECK_THROWS_AS(permutation_match(S, random_matrix(10, 2, 2)), InvalidArgument);
    Matrix constant = S;
    for (std::size_t i = 0; i < 10; ++i) constant(i, 0) = 1.0;
    CHECK_THROWS_AS(permutation_match(constant, S), UndefinedCorrelation);
    CHECK_THROWS_AS(permutation_match(random_matrix(10, 9, 3), random_matrix(10, 9, 4)), UnsupportedSize);
    CHECK_NOTHROW(permutation_match(random_matrix(12, 8, 3), random_matrix(12, 8, 4)));
  }

  TEST_CASE("ties resolve to the lexicographically smallest permutation") {
    Matrix S(6, 2);
    const double col[] = {1.0, -1.0, 2.0, 0.5, -0.5, -2.0};
    for (std::size_t i = 0; i < 6; ++i) S(i, 0) = S(i, 1) = col[i];
    CHECK(permutation_match(S, S).permutation == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("abs_corr_table") {
    const Matrix a = random_matrix(30, 3, 5);
    const Matrix b = random_matrix(30, 3, 6);
    const Matrix t = abs_corr_table(a, b);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k) CHECK(t(i, k) == pearson_abs_corr(a.column(i), b.column(k)));
  }
}
