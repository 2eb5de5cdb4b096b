#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qfi_rixs/scattering.hpp"
#include "qfi_rixs/types.hpp"

namespace qfi::manybody {

inline constexpr std::size_t kDefaultDimensionCap = 200000;

/// N sites with n_orb orbitals and spin 1/2 each; one particle per site.
/// Local index = spin * n_orb + orbital. Site 0 is the most significant
/// factor of the product basis.
struct LatticeSpec {
  int n_sites = 1;
  int n_orb = 1;
  std::vector<double> site_positions;
  std::size_t dimension_cap = kDefaultDimensionCap;

  /// Uniform chain r_j = j.
  static LatticeSpec chain(int n_sites, int n_orb);

  int local_dim() const { return 2 * n_orb; }
  /// Throws ResourceError if local_dim^n_sites exceeds the cap.
  std::size_t total_dim() const;
  void validate() const;
};

/// Disjoint blocks of site indices covering 0..N-1.
struct PartitionSpec {
  std::vector<std::vector<int>> blocks;

  int k() const;
  void validate(int n_sites) const;

  static PartitionSpec singletons(int n_sites);
  static PartitionSpec whole(int n_sites);
};

class ManyBodyState {
 public:
  /// Throws DomainError unless the norm is 1 within 1e-10.
  ManyBodyState(CVector amplitudes, LatticeSpec lattice);

  const CVector& amplitudes() const { return amplitudes_; }
  const LatticeSpec& lattice() const { return lattice_; }

 private:
  CVector amplitudes_;
  LatticeSpec lattice_;
};

/// Tensor product of Haar-random block states; deterministic in `seed`.
ManyBodyState random_k_producible_state(const LatticeSpec& lattice, const PartitionSpec& partition,
                                        std::uint64_t seed);

/// Random partition of N sites with every block of size <= k and at least one
/// block of size exactly min(k, N).
PartitionSpec random_partition(int n_sites, int k, std::uint64_t seed);

/// Product state from one normalized local vector per site.
ManyBodyState product_state(const LatticeSpec& lattice, std::span<const CVector> local_states);

/// Applies `op` (d_out x dims[site]) to one tensor factor of a vector whose
/// factors have dimensions `dims`.
CVector apply_local(const CVector& v, std::span<const int> dims, int site, const CMatrix& op);

/// T_q |psi> = sum_j e^{i q r_j} T_j |psi>, by site-wise contraction.
CVector apply_t_q(const CVector& v, const LatticeSpec& lattice, const CMatrix& t, double q_chain);
CVector apply_t_q(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain);
/// T_q^dagger |psi>.
CVector apply_t_q_dagger(const CVector& v, const LatticeSpec& lattice, const CMatrix& t,
                         double q_chain);

/// <psi| T_q^2 |psi>.
cplx t_sq_expectation(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain);

/// 4 Var(O_q) for O_q = (e^{i phase} T_q + e^{-i phase} T_q^dagger)/sqrt(2).
double qfi_pure(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain,
                double phase);

/// The three terms 2<T^dag T>_c, 2<T T^dag>_c, 4 Re[e^{2i phase} <T^2>_c]
/// plus the bare <T^2> (as printed in the third term) and <T>.
struct QfiTerms {
  double stokes_forward = 0.0;
  double stokes_reverse = 0.0;
  double phase_term = 0.0;
  double phase_term_bare = 0.0;
  cplx t_sq = 0.0;
  cplx t_mean = 0.0;

  double total() const { return stokes_forward + stokes_reverse + phase_term; }
};
QfiTerms qfi_terms(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain,
                   double phase);

/// Largest QFI over product states: sum_j (spread of T_bar_j / sqrt(2))^2.
double max_qfi_product_states(const LatticeSpec& lattice, const scattering::TMatrix& t,
                              double q_chain, double phase);

/// The product state attaining max_qfi_product_states: on every site the
/// equal superposition of the extreme eigenvectors of the local generator.
ManyBodyState extremal_product_state(const LatticeSpec& lattice, const scattering::TMatrix& t,
                                     double q_chain, double phase);

/// Little-endian complex doubles preceded by a one-line JSON header.
void dump_state(const std::filesystem::path& path, const ManyBodyState& state);
ManyBodyState load_state(const std::filesystem::path& path);

}  // namespace qfi::manybody
