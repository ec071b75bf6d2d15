#pragma once

// Weak decorrelation penalty on the latent columns: |C - I|_F^2 where C is the
// correlation matrix of the centered, softly normalized columns.

#include "strebm/matrix.hpp"

namespace strebm {

struct CorrelationMatrix {
  Matrix C;  // n x n, symmetric
};

// (s_j - mean_j) / sqrt(mean squared deviation + eps_s), per column. T >= 2.
Matrix normalize_columns(const Matrix& S, double eps_s);

// C = S_tilde^T S_tilde / T
CorrelationMatrix correlation_matrix(const Matrix& S_tilde);

double separation_loss(const CorrelationMatrix& C);

// Gradient of separation_loss(correlation_matrix(normalize_columns(S))) with
// respect to the raw S; the column means and variances are differentiated too.
Matrix separation_grad(const Matrix& S, double eps_s);

struct SeparationEval {
  double loss = 0.0;
  Matrix grad;
};
SeparationEval separation_value_and_grad(const Matrix& S, double eps_s);

}  // namespace strebm
