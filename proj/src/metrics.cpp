#include "oamp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oamp {

namespace {

Mat orthonormal_basis(const Mat& A) {
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < A.cols()) throw std::invalid_argument("subspace_distance: rank-deficient input");
  Mat Q = qr.householderQ() * Mat::Identity(A.rows(), A.cols());
  return Q;
}

} // namespace

double subspace_distance(const Mat& A, const Mat& B) {
  if (A.rows() != B.rows()) throw std::invalid_argument("subspace_distance: row mismatch");
  if (A.cols() == 0 || B.cols() == 0) throw std::invalid_argument("subspace_distance: empty input");
  Mat Qa = orthonormal_basis(A), Qb = orthonormal_basis(B);
  if (Qa.cols() != Qb.cols()) return 1.0;
  // Largest singular value of (I − Π_A) Q_b: the sine form stays accurate near zero.
  Mat resid = Qb - Qa * (Qa.transpose() * Qb);
  Eigen::JacobiSVD<Mat> svd(resid);
  return std::min(1.0, svd.singularValues()(0));
}

double mse(const Mat& estimate, const Mat& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("mse: dimension mismatch");
  return (estimate - truth).squaredNorm() / static_cast<double>(truth.rows());
}

double align_sq(const Mat& estimate, const Mat& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("align_sq: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < truth.cols(); ++k) {
    const double d = estimate.col(k).norm() * truth.col(k).norm();
    if (d > 0.0) {
      const double c = estimate.col(k).dot(truth.col(k)) / d;
      sum += c * c;
    }
  }
  return sum / static_cast<double>(truth.cols());
}

double residual_cov_error(const Mat& F, const Mat& truth, const Mat& predicted) {
  if (F.rows() != truth.rows()) throw std::invalid_argument("residual_cov_error: row mismatch");
  Mat coef = (truth.transpose() * truth).ldlt().solve(truth.transpose() * F);
  return cov_error(F - truth * coef, predicted);
}

double cov_error(const Mat& Z, const Mat& predicted) {
  if (predicted.rows() != Z.cols() || predicted.cols() != Z.cols())
    throw std::invalid_argument("cov_error: dimension mismatch");
  Mat sample = Z.transpose() * Z / static_cast<double>(Z.rows());
  const double denom = predicted.norm();
  if (!(denom > 0.0)) return sample.norm() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return (sample - predicted).norm() / denom;
}

} // namespace oamp
