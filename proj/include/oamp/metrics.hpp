#pragma once

#include "oamp/block_matrix.hpp"

namespace oamp {

// ‖Π_A − Π_B‖_op for the column spans of A and B (sine of the largest principal angle).
double subspace_distance(const Mat& A, const Mat& B);

// rows⁻¹ ‖estimate − truth‖_F²
double mse(const Mat& estimate, const Mat& truth);

// Squared cosine between matching columns, averaged over columns.
double align_sq(const Mat& estimate, const Mat& truth);

// Relative Frobenius gap between the sample covariance of the rows of F after
// regressing out the truth, and the predicted covariance.
double residual_cov_error(const Mat& F, const Mat& truth, const Mat& predicted);

// Same without a signal component.
double cov_error(const Mat& Z, const Mat& predicted);

} // namespace oamp
