#pragma once

#include <optional>
#include <vector>

#include "qfi_rixs/angular.hpp"
#include "qfi_rixs/types.hpp"

namespace qfi::scattering {

/// Single-site scattering matrix T(eps_i, eps_s) on the valence spin-orbitals.
struct TMatrix {
  CMatrix entries;
  std::optional<geometry::PolarizationVector> eps_i;
  std::optional<geometry::PolarizationVector> eps_s;
};

/// T = M_s^dagger M_i, i.e. T_ab = sum_g conj(M_s(g,a)) M_i(g,b).
TMatrix t_matrix(const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s);

/// T(eps_s, eps_i) = T(eps_i, eps_s)^dagger.
TMatrix conjugate_t(const TMatrix& t);

/// pi/4 - Arg(<T_q^2>)/2 reduced to [0, pi); pi/4 when |<T_q^2>| < 1e-12.
double optimal_phase(cplx t_sq_expectation);

/// Hermitian single-site generator e^{i a} T + e^{-i a} T^dagger with
/// a = q_chain * r_j + phase.
struct LocalGeneratorMatrix {
  CMatrix entries;
  int site_index = 0;
};

LocalGeneratorMatrix local_generator(const TMatrix& t, double q_chain, double r_j, double phase,
                                     int site_index = 0);

/// lambda_max - lambda_min. Throws DomainError if h is not Hermitian within 1e-10.
double eigenvalue_spread(const CMatrix& h);

/// Everything that fixes O_q = (e^{i phi} T_q + e^{-i phi} T_q^dagger) / sqrt(2).
struct HermitianGenerator {
  TMatrix t;
  double q_chain = 0.0;
  double phase = 0.0;
  std::vector<double> site_positions;

  /// Dense O_q on the full product space; only meant for small clusters.
  CMatrix assemble() const;
};

}  // namespace qfi::scattering
