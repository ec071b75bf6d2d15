#pragma once

// Permutation-matched absolute correlation between recovered and true
// sources. Used only for monitoring; never feeds a gradient.

#include <cstddef>
#include <span>
#include <vector>

#include "strebm/matrix.hpp"

namespace strebm {

inline constexpr std::size_t kMaxMatchSources = 8;

struct MatchReport {
  std::vector<std::size_t> permutation;  // estimated column i -> true column permutation[i]
  Vector per_pair_abs_corr;              // |corr(S_hat_i, S_true_permutation[i])|
  double mean_abs_corr = 0.0;
};

// |Pearson correlation|, clamped to [0, 1]. Throws UndefinedCorrelation for a
// constant input.
double pearson_abs_corr(std::span<const double> a, std::span<const double> b);

// n x n table of |corr(S_hat column i, S_true column k)|.
Matrix abs_corr_table(const Matrix& S_hat, const Matrix& S_true);

// Exhaustive search over all n! assignments; ties go to the lexicographically
// smallest permutation. n <= kMaxMatchSources.
MatchReport permutation_match(const Matrix& S_hat, const Matrix& S_true);

}  // namespace strebm
