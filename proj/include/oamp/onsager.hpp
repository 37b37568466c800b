#pragma once

#include <vector>

#include "oamp/block_matrix.hpp"
#include "oamp/spectrum.hpp"

namespace oamp {

// Averaged Jacobians ⟨∂_s U_r⟩ collected by an engine. Entry r is K × (c·K) and
// fills blocks [r, 0..c−1]; an empty matrix means "no arguments".
//
// Independent initialization (iterates numbered from 1, stored from 0):
//   u[r] is the Jacobian of U_{r+1} in Z_1..Z_r, v[r] of V_{r+1} in Z_1..Z_{r+1}.
// Spectral initialization (iterates numbered from 0):
//   u[r] is the Jacobian of U_r in F_0..F_{r−1} (symmetric: r ≥ 1; rectangular: r ≥ 2),
//   v[t] is the Jacobian of V_t in G_1..G_t (t ≥ 1).
struct DerivativeLedger {
  int k = 1;
  std::vector<Mat> u, v;
};

// φ_T for the independent-init loops (T blocks).
BlockMatrix assemble_phi(const DerivativeLedger& d, int T);
// ψ_T for the rectangular independent-init loop (T blocks). A missing final row is NaN.
BlockMatrix assemble_psi(const DerivativeLedger& d, int T);

// Spectral layouts, blocks indexed 0..T.
BlockMatrix assemble_phi_sym_spectral(const DerivativeLedger& d, int T);
BlockMatrix assemble_phi_rect_spectral(const DerivativeLedger& d, const DiagScaler& S_u, int T);
// A missing final row (V_T not computed yet) is NaN.
BlockMatrix assemble_psi_rect_spectral(const DerivativeLedger& d, const DiagScaler& S_v, int T);

// Σ_j κ_{j+1} φ^j
BlockMatrix debias_sym_independent(const BlockMatrix& phi, const CumulantModel& kappa);
// Column 0 from Σ_j φ^j ⊙ κ̃_{j+1}, the rest from Σ_j κ_{j+1} φ^j.
BlockMatrix debias_sym_spectral(const BlockMatrix& phi, const CumulantModel& kappa, const KappaSeriesTables& tables);

struct RectCoefficients {
  BlockMatrix a, b;
};
// a = Σ κ_{2(j+1)} ψ(φψ)^j, b = γ Σ κ_{2(j+1)} φ(ψφ)^j
RectCoefficients debias_rect_independent(const BlockMatrix& phi, const BlockMatrix& psi, const CumulantModel& kappa,
                                         double gamma);
RectCoefficients debias_rect_spectral(const BlockMatrix& phi, const BlockMatrix& psi, const CumulantModel& kappa,
                                      const KappaSeriesTables& tables, double gamma);

} // namespace oamp
