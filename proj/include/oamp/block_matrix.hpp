#pragma once

#include <Eigen/Dense>
#include <vector>

namespace oamp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Diagonal K×K matrix stored by its entries.
using DiagScaler = Eigen::VectorXd;

// T_r × T_c grid of K×K blocks backed by one dense matrix.
class BlockMatrix {
public:
  BlockMatrix() = default;
  BlockMatrix(int row_blocks, int col_blocks, int k);
  BlockMatrix(const Mat& dense, int k);

  static BlockMatrix zeros(int row_blocks, int col_blocks, int k);
  static BlockMatrix identity(int blocks, int k);

  int row_blocks() const { return tr_; }
  int col_blocks() const { return tc_; }
  int block_dim() const { return k_; }
  bool square() const { return tr_ == tc_; }

  const Mat& dense() const { return data_; }
  Mat& dense() { return data_; }

  auto block(int r, int c) { return data_.block(r * k_, c * k_, k_, k_); }
  auto block(int r, int c) const { return data_.block(r * k_, c * k_, k_, k_); }
  void set_block(int r, int c, const Mat& b);

  // Block is identically zero (every entry compares equal to 0.0).
  bool block_is_zero(int r, int c) const;
  bool is_zero() const;
  bool is_strictly_lower() const;
  bool is_lower() const;
  bool has_nan() const;

  BlockMatrix transpose() const;
  // Leading r×c sub-grid.
  BlockMatrix leading(int row_blocks, int col_blocks) const;

  BlockMatrix& operator+=(const BlockMatrix& o);
  BlockMatrix& operator-=(const BlockMatrix& o);
  BlockMatrix& operator*=(double s);

private:
  int tr_ = 0, tc_ = 0, k_ = 1;
  Mat data_;
};

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b);
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b);
BlockMatrix operator*(double s, BlockMatrix a);

// Block product that never touches a pair of blocks when either one is
// identically zero, so undefined (NaN) blocks sitting against structural
// zeros do not leak into the result.
BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b);

BlockMatrix block_right_scale(const BlockMatrix& m, const DiagScaler& d);
BlockMatrix block_left_scale(const DiagScaler& d, const BlockMatrix& m);

// Σ_j c_j A^j with A^0 = Id. Stops once a power is exactly zero.
BlockMatrix block_power_series(const BlockMatrix& a, const std::vector<double>& coeffs);

// Powers A^0..A^max_pow, truncated after the first exactly-zero power
// (later entries are zero matrices).
std::vector<BlockMatrix> block_powers(const BlockMatrix& a, int max_pow);

// Σ_{i=0}^j Φ^i M (Φᵀ)^{j−i}
BlockMatrix theta_sym(const BlockMatrix& phi, const BlockMatrix& m, int j);

// Σ_{i=0}^j (ΦΨ)^i MΔ (ΨᵀΦᵀ)^{j−i} + Σ_{i=0}^{j−1} (ΦΨ)^i Φ MΓ Φᵀ (ΨᵀΦᵀ)^{j−1−i}
BlockMatrix theta_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& m_delta,
                       const BlockMatrix& m_gamma, int j);

// Σ_{i=0}^j (ΨΦ)^i MΓ (ΦᵀΨᵀ)^{j−i} + Σ_{i=0}^{j−1} (ΨΦ)^i Ψ MΔ Ψᵀ (ΦᵀΨᵀ)^{j−1−i}
BlockMatrix xi_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& m_delta,
                    const BlockMatrix& m_gamma, int j);

} // namespace oamp
