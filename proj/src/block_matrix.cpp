#include "oamp/block_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace oamp {

BlockMatrix::BlockMatrix(int row_blocks, int col_blocks, int k)
    : tr_(row_blocks), tc_(col_blocks), k_(k), data_(Mat::Zero(row_blocks * k, col_blocks * k)) {
  if (row_blocks < 0 || col_blocks < 0 || k < 1) throw std::invalid_argument("BlockMatrix: bad shape");
}

BlockMatrix::BlockMatrix(const Mat& dense, int k) : k_(k), data_(dense) {
  if (k < 1 || dense.rows() % k != 0 || dense.cols() % k != 0)
    throw std::invalid_argument("BlockMatrix: dimensions are not multiples of the block size");
  tr_ = static_cast<int>(dense.rows() / k);
  tc_ = static_cast<int>(dense.cols() / k);
}

BlockMatrix BlockMatrix::zeros(int row_blocks, int col_blocks, int k) {
  return BlockMatrix(row_blocks, col_blocks, k);
}

BlockMatrix BlockMatrix::identity(int blocks, int k) {
  BlockMatrix m(blocks, blocks, k);
  m.data_.setIdentity();
  return m;
}

void BlockMatrix::set_block(int r, int c, const Mat& b) {
  if (b.rows() != k_ || b.cols() != k_) throw std::invalid_argument("set_block: block size mismatch");
  block(r, c) = b;
}

bool BlockMatrix::block_is_zero(int r, int c) const {
  auto b = block(r, c);
  for (int j = 0; j < k_; ++j)
    for (int i = 0; i < k_; ++i)
      if (!(b(i, j) == 0.0)) return false;
  return true;
}

bool BlockMatrix::is_zero() const {
  for (int r = 0; r < tr_; ++r)
    for (int c = 0; c < tc_; ++c)
      if (!block_is_zero(r, c)) return false;
  return true;
}

bool BlockMatrix::is_strictly_lower() const {
  for (int r = 0; r < tr_; ++r)
    for (int c = r; c < tc_; ++c)
      if (!block_is_zero(r, c)) return false;
  return true;
}

bool BlockMatrix::is_lower() const {
  for (int r = 0; r < tr_; ++r)
    for (int c = r + 1; c < tc_; ++c)
      if (!block_is_zero(r, c)) return false;
  return true;
}

bool BlockMatrix::has_nan() const { return data_.hasNaN(); }

BlockMatrix BlockMatrix::transpose() const {
  BlockMatrix t;
  t.tr_ = tc_;
  t.tc_ = tr_;
  t.k_ = k_;
  t.data_ = data_.transpose();
  return t;
}

BlockMatrix BlockMatrix::leading(int row_blocks, int col_blocks) const {
  if (row_blocks > tr_ || col_blocks > tc_) throw std::out_of_range("leading: grid too large");
  return BlockMatrix(Mat(data_.topLeftCorner(row_blocks * k_, col_blocks * k_)), k_);
}

static void check_same(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.row_blocks() != b.row_blocks() || a.col_blocks() != b.col_blocks() || a.block_dim() != b.block_dim())
    throw std::invalid_argument("block matrix shape mismatch");
}

BlockMatrix& BlockMatrix::operator+=(const BlockMatrix& o) {
  check_same(*this, o);
  data_ += o.data_;
  return *this;
}

BlockMatrix& BlockMatrix::operator-=(const BlockMatrix& o) {
  check_same(*this, o);
  data_ -= o.data_;
  return *this;
}

BlockMatrix& BlockMatrix::operator*=(double s) {
  data_ *= s;
  return *this;
}

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }
BlockMatrix operator*(double s, BlockMatrix a) { return a *= s; }

BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.col_blocks() != b.row_blocks() || a.block_dim() != b.block_dim())
    throw std::invalid_argument("block product shape mismatch");
  const int k = a.block_dim();
  const int n = a.col_blocks();
  std::vector<char> za(static_cast<size_t>(a.row_blocks()) * n), zb(static_cast<size_t>(n) * b.col_blocks());
  for (int r = 0; r < a.row_blocks(); ++r)
    for (int s = 0; s < n; ++s) za[r * n + s] = a.block_is_zero(r, s);
  for (int s = 0; s < n; ++s)
    for (int c = 0; c < b.col_blocks(); ++c) zb[s * b.col_blocks() + c] = b.block_is_zero(s, c);

  BlockMatrix out(a.row_blocks(), b.col_blocks(), k);
  for (int r = 0; r < a.row_blocks(); ++r)
    for (int c = 0; c < b.col_blocks(); ++c) {
      Mat acc = Mat::Zero(k, k);
      for (int s = 0; s < n; ++s) {
        if (za[r * n + s] || zb[s * b.col_blocks() + c]) continue;
        acc.noalias() += a.block(r, s) * b.block(s, c);
      }
      out.block(r, c) = acc;
    }
  return out;
}

BlockMatrix block_right_scale(const BlockMatrix& m, const DiagScaler& d) {
  if (d.size() != m.block_dim()) throw std::invalid_argument("block_right_scale: dimension mismatch");
  BlockMatrix out = m;
  for (int c = 0; c < m.col_blocks(); ++c)
    for (int j = 0; j < m.block_dim(); ++j) out.dense().col(c * m.block_dim() + j) *= d(j);
  return out;
}

BlockMatrix block_left_scale(const DiagScaler& d, const BlockMatrix& m) {
  if (d.size() != m.block_dim()) throw std::invalid_argument("block_left_scale: dimension mismatch");
  BlockMatrix out = m;
  for (int r = 0; r < m.row_blocks(); ++r)
    for (int i = 0; i < m.block_dim(); ++i) out.dense().row(r * m.block_dim() + i) *= d(i);
  return out;
}

std::vector<BlockMatrix> block_powers(const BlockMatrix& a, int max_pow) {
  if (!a.square()) throw std::invalid_argument("block_powers: matrix must be square");
  std::vector<BlockMatrix> p;
  p.reserve(max_pow + 1);
  p.push_back(BlockMatrix::identity(a.row_blocks(), a.block_dim()));
  bool vanished = false;
  for (int j = 1; j <= max_pow; ++j) {
    if (vanished) {
      p.push_back(BlockMatrix::zeros(a.row_blocks(), a.col_blocks(), a.block_dim()));
      continue;
    }
    p.push_back(p.back() * a);
    vanished = p.back().is_zero();
  }
  return p;
}

BlockMatrix block_power_series(const BlockMatrix& a, const std::vector<double>& coeffs) {
  if (!a.square()) throw std::invalid_argument("block_power_series: matrix must be square");
  BlockMatrix out = BlockMatrix::zeros(a.row_blocks(), a.col_blocks(), a.block_dim());
  BlockMatrix p = BlockMatrix::identity(a.row_blocks(), a.block_dim());
  for (size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) {
      p = p * a;
      if (p.is_zero()) break;
    }
    if (coeffs[j] != 0.0) out += coeffs[j] * p;
  }
  return out;
}

static void check_square_same(const BlockMatrix& a, const BlockMatrix& b) {
  if (!a.square()) throw std::invalid_argument("operator argument must be square");
  check_same(a, b);
}

// Σ_{i=0}^j N^i M (Nᵀ)^{j−i} given precomputed powers of N and Nᵀ.
static BlockMatrix sandwich_sum(const std::vector<BlockMatrix>& np, const std::vector<BlockMatrix>& ntp,
                                const BlockMatrix& m, int j) {
  BlockMatrix out = BlockMatrix::zeros(m.row_blocks(), m.col_blocks(), m.block_dim());
  for (int i = 0; i <= j; ++i) {
    if (np[i].is_zero() || ntp[j - i].is_zero()) continue;
    out += np[i] * m * ntp[j - i];
  }
  return out;
}

BlockMatrix theta_sym(const BlockMatrix& phi, const BlockMatrix& m, int j) {
  check_square_same(phi, m);
  if (j < 0) throw std::invalid_argument("theta_sym: negative order");
  auto p = block_powers(phi, j);
  auto pt = block_powers(phi.transpose(), j);
  return sandwich_sum(p, pt, m, j);
}

static BlockMatrix theta_generic(const BlockMatrix& first, const BlockMatrix& second, const BlockMatrix& lead,
                                 const BlockMatrix& cross, int j) {
  // (first·second)^i lead (..)ᵀ + (first·second)^i first cross firstᵀ (..)ᵀ
  BlockMatrix n = first * second;
  auto np = block_powers(n, j);
  auto ntp = block_powers(n.transpose(), j);
  BlockMatrix out = sandwich_sum(np, ntp, lead, j);
  if (j >= 1) {
    BlockMatrix inner = (first * cross) * first.transpose();
    out += sandwich_sum(np, ntp, inner, j - 1);
  }
  return out;
}

BlockMatrix theta_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& m_delta,
                       const BlockMatrix& m_gamma, int j) {
  check_square_same(phi, psi);
  check_same(phi, m_delta);
  check_same(phi, m_gamma);
  if (j < 0) throw std::invalid_argument("theta_rect: negative order");
  return theta_generic(phi, psi, m_delta, m_gamma, j);
}

BlockMatrix xi_rect(const BlockMatrix& phi, const BlockMatrix& psi, const BlockMatrix& m_delta,
                    const BlockMatrix& m_gamma, int j) {
  check_square_same(phi, psi);
  check_same(phi, m_delta);
  check_same(phi, m_gamma);
  if (j < 0) throw std::invalid_argument("xi_rect: negative order");
  return theta_generic(psi, phi, m_gamma, m_delta, j);
}

} // namespace oamp
