#include "oamp/onsager.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace oamp {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Copy row r of the ledger into blocks [row, col0 .. col0+c−1].
void put_row(BlockMatrix& m, int row, int col0, const Mat& jac, int k, int max_cols) {
  if (jac.size() == 0) return;
  if (jac.rows() != k || jac.cols() % k != 0 || jac.cols() / k > max_cols)
    throw std::invalid_argument("derivative ledger: malformed row " + std::to_string(row));
  m.dense().block(row * k, col0 * k, k, jac.cols()) = jac;
}

void nan_row(BlockMatrix& m, int row) {
  const int k = m.block_dim();
  m.dense().middleRows(row * k, k).setConstant(kNaN);
}

} // namespace

BlockMatrix assemble_phi(const DerivativeLedger& d, int T) {
  if (T < 1) throw std::invalid_argument("assemble_phi: T must be >= 1");
  if (static_cast<int>(d.u.size()) < T) throw std::invalid_argument("assemble_phi: missing derivative block");
  BlockMatrix m = BlockMatrix::zeros(T, T, d.k);
  for (int r = 0; r < T; ++r) put_row(m, r, 0, d.u[r], d.k, r);
  return m;
}

BlockMatrix assemble_psi(const DerivativeLedger& d, int T) {
  if (T < 1) throw std::invalid_argument("assemble_psi: T must be >= 1");
  const int have = static_cast<int>(d.v.size());
  if (have < T - 1) throw std::invalid_argument("assemble_psi: missing derivative block");
  BlockMatrix m = BlockMatrix::zeros(T, T, d.k);
  for (int r = 0; r < T; ++r) {
    if (r < have)
      put_row(m, r, 0, d.v[r], d.k, r + 1);
    else
      nan_row(m, r);
  }
  return m;
}

BlockMatrix assemble_phi_sym_spectral(const DerivativeLedger& d, int T) {
  if (T < 0) throw std::invalid_argument("assemble_phi: T must be >= 0");
  if (static_cast<int>(d.u.size()) < T + 1) throw std::invalid_argument("assemble_phi: missing derivative block");
  BlockMatrix m = BlockMatrix::zeros(T + 1, T + 1, d.k);
  for (int r = 1; r <= T; ++r) put_row(m, r, 0, d.u[r], d.k, r);
  return m;
}

BlockMatrix assemble_phi_rect_spectral(const DerivativeLedger& d, const DiagScaler& S_u, int T) {
  if (T < 0) throw std::invalid_argument("assemble_phi: T must be >= 0");
  if (T >= 2 && static_cast<int>(d.u.size()) < T + 1)
    throw std::invalid_argument("assemble_phi: missing derivative block");
  BlockMatrix m = BlockMatrix::zeros(T + 1, T + 1, d.k);
  if (T >= 1) m.set_block(1, 0, S_u.cwiseInverse().asDiagonal().toDenseMatrix());
  for (int r = 2; r <= T; ++r) put_row(m, r, 0, d.u[r], d.k, r);
  return m;
}

BlockMatrix assemble_psi_rect_spectral(const DerivativeLedger& d, const DiagScaler& S_v, int T) {
  if (T < 0) throw std::invalid_argument("assemble_psi: T must be >= 0");
  const int have = static_cast<int>(d.v.size()) - 1;  // last V index available
  if (have < T - 1) throw std::invalid_argument("assemble_psi: missing derivative block");
  BlockMatrix m = BlockMatrix::zeros(T + 1, T + 1, d.k);
  m.set_block(0, 0, S_v.cwiseInverse().asDiagonal().toDenseMatrix());
  for (int r = 1; r <= T; ++r) {
    if (r <= have)
      put_row(m, r, 1, d.v[r], d.k, r);
    else
      nan_row(m, r);
  }
  return m;
}

BlockMatrix debias_sym_independent(const BlockMatrix& phi, const CumulantModel& kappa) {
  if (!phi.is_strictly_lower()) throw std::invalid_argument("debias: phi must be strictly block-lower-triangular");
  std::vector<double> c(phi.row_blocks());
  for (int j = 0; j < phi.row_blocks(); ++j) c[j] = kappa.at(j + 1);
  return block_power_series(phi, c);
}

BlockMatrix debias_sym_spectral(const BlockMatrix& phi, const CumulantModel& kappa, const KappaSeriesTables& tables) {
  if (!phi.is_strictly_lower()) throw std::invalid_argument("debias: phi must be strictly block-lower-triangular");
  const int nb = phi.row_blocks(), k = phi.block_dim();
  std::vector<BlockMatrix> pw = block_powers(phi, nb);
  BlockMatrix b = BlockMatrix::zeros(nb, nb, k);
  BlockMatrix bt = BlockMatrix::zeros(nb, nb, k);
  for (int j = 0; j < static_cast<int>(pw.size()); ++j) {
    if (pw[j].is_zero()) break;
    b += kappa.at(j + 1) * pw[j];
    bt += block_right_scale(pw[j], tables.kt(j + 1));
  }
  for (int r = 0; r < nb; ++r) b.set_block(r, 0, bt.block(r, 0));
  return b;
}

namespace {

// Terms ψ(φψ)^j for j = 0.. until the term vanishes; NaN-only rows do not stop the series.
std::vector<BlockMatrix> alternating_terms(const BlockMatrix& lead, const BlockMatrix& pair) {
  std::vector<BlockMatrix> terms;
  BlockMatrix term = lead;
  const int cap = 2 * pair.row_blocks() + 2;
  for (int j = 0; j <= cap; ++j) {
    bool all_zero = true;
    for (int r = 0; r < term.row_blocks() && all_zero; ++r)
      for (int c = 0; c < term.col_blocks(); ++c)
        if (!term.block_is_zero(r, c) && !term.block(r, c).hasNaN()) {
          all_zero = false;
          break;
        }
    if (all_zero) break;
    terms.push_back(term);
    term = term * pair;
  }
  return terms;
}

void check_rect_shapes(const BlockMatrix& phi, const BlockMatrix& psi) {
  if (!phi.square() || !psi.square() || phi.row_blocks() != psi.row_blocks() || phi.block_dim() != psi.block_dim())
    throw std::invalid_argument("debias: phi/psi shape mismatch");
  if (!phi.is_strictly_lower()) throw std::invalid_argument("debias: phi must be strictly block-lower-triangular");
}

} // namespace

RectCoefficients debias_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const CumulantModel& kappa,
                                         double gamma) {
  check_rect_shapes(phi, psi);
  const int nb = phi.row_blocks(), k = phi.block_dim();
  RectCoefficients out{BlockMatrix::zeros(nb, nb, k), BlockMatrix::zeros(nb, nb, k)};
  std::vector<BlockMatrix> ta = alternating_terms(psi, phi * psi);
  std::vector<BlockMatrix> tb = alternating_terms(phi, psi * phi);
  for (size_t j = 0; j < ta.size(); ++j) out.a += kappa.at(static_cast<int>(j) + 1) * ta[j];
  for (size_t j = 0; j < tb.size(); ++j) out.b += (gamma * kappa.at(static_cast<int>(j) + 1)) * tb[j];
  return out;
}

RectCoefficients debias_rect_spectral(const BlockMatrix& phi, const BlockMatrix& psi, const CumulantModel& kappa,
                                      const KappaSeriesTables& tables, double gamma) {
  check_rect_shapes(phi, psi);
  const int nb = phi.row_blocks(), k = phi.block_dim();
  RectCoefficients out{BlockMatrix::zeros(nb, nb, k), BlockMatrix::zeros(nb, nb, k)};
  BlockMatrix at = BlockMatrix::zeros(nb, nb, k), bt = BlockMatrix::zeros(nb, nb, k);
  std::vector<BlockMatrix> ta = alternating_terms(psi, phi * psi);
  std::vector<BlockMatrix> tb = alternating_terms(phi, psi * phi);
  for (size_t j = 0; j < ta.size(); ++j) {
    const int s = static_cast<int>(j) + 1;
    out.a += kappa.at(s) * ta[j];
    at += block_right_scale(ta[j], tables.kt(s));
  }
  for (size_t j = 0; j < tb.size(); ++j) {
    const int s = static_cast<int>(j) + 1;
    out.b += (gamma * kappa.at(s)) * tb[j];
    bt += gamma * block_right_scale(tb[j], tables.kt(s));
  }
  for (int r = 0; r < nb; ++r) {
    out.a.set_block(r, 0, at.block(r, 0));
    out.b.set_block(r, 0, bt.block(r, 0));
  }
  return out;
}

} // namespace oamp
