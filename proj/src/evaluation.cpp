#include "strebm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "strebm/errors.hpp"

namespace strebm {
namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double pearson_abs_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson_abs_corr: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pearson_abs_corr: need at least two samples");
  if (is_constant(a) || is_constant(b))
    throw UndefinedCorrelation("pearson_abs_corr: correlation with a constant vector");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double r = std::abs(sab) / std::sqrt(saa * sbb);
  if (!std::isfinite(r)) throw UndefinedCorrelation("pearson_abs_corr: degenerate input");
  return std::min(r, 1.0);
}

Matrix abs_corr_table(const Matrix& S_hat, const Matrix& S_true) {
  require_same_shape(S_hat, S_true, "abs_corr_table");
  const std::size_t n = S_hat.cols();
  std::vector<Vector> est(n);
  std::vector<Vector> ref(n);
  for (std::size_t j = 0; j < n; ++j) {
    est[j] = S_hat.column(j);
    ref[j] = S_true.column(j);
  }
  Matrix table(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) table(i, k) = pearson_abs_corr(est[i], ref[k]);
  return table;
}

MatchReport permutation_match(const Matrix& S_hat, const Matrix& S_true) {
  require_same_shape(S_hat, S_true, "permutation_match");
  const std::size_t n = S_hat.cols();
  if (n == 0) throw InvalidArgument("permutation_match: no sources");
  if (n > kMaxMatchSources)
    throw UnsupportedSize("permutation_match: n = " + std::to_string(n) +
                          " exceeds the exhaustive-search bound of " +
                          std::to_string(kMaxMatchSources));
  const Matrix table = abs_corr_table(S_hat, S_true);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_sum = -1.0;
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += table(i, perm[i]);
    // Strict comparison keeps the first (lexicographically smallest) maximizer.
    if (sum > best_sum) {
      best_sum = sum;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  MatchReport report;
  report.permutation = best;
  report.per_pair_abs_corr.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.per_pair_abs_corr[i] = table(i, best[i]);
  report.mean_abs_corr =
      std::accumulate(report.per_pair_abs_corr.begin(), report.per_pair_abs_corr.end(), 0.0) /
      static_cast<double>(n);
  return report;
}

}  // namespace strebm
