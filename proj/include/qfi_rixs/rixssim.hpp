#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfi_rixs/angular.hpp"
#include "qfi_rixs/manybody.hpp"
#include "qfi_rixs/types.hpp"

namespace qfi::rixssim {

inline constexpr std::size_t kDefaultSectorCap = 4096;

/// Spin-orbital cluster in hole language, energies in units of J_s.
///
/// Valence:  J_s S_i.S_j + J_so (S_i.S_j) P_ij + sum_l delta_cf[l] n_l + h.S
/// on every bond <ij>, where P_ij swaps the orbital labels of the two sites.
/// Core hole at site c: site c carries a 2p hole with energy E_edge and
/// spin-orbit xi_c L.S, bonds touching c are replaced by U_c times the
/// orbital-0 occupation of the neighbour, all other terms are unchanged.
struct ClusterParams {
  double J_s = 1.0;
  double J_so = 0.3;
  std::vector<double> delta_cf;  // one per orbital; empty = zeros
  Vec3 field = Vec3(0.05, 0.0, 0.2);
  double E_edge = 3.0;
  double xi_c = 0.5;
  double U_c = 0.5;
  double gamma = 0.5;
  bool periodic = false;
  /// Active 3d orbitals as real-harmonic indices (2 = x2-y2, 0 = z2,
  /// -2 = xy, 1 = xz, -1 = yz); empty = the first n_orb of that list.
  std::vector<int> orbitals;
};

class ClusterModel {
 public:
  ClusterModel(manybody::LatticeSpec lattice, ClusterParams params,
               std::size_t sector_cap = kDefaultSectorCap);

  const manybody::LatticeSpec& lattice() const { return lattice_; }
  const ClusterParams& params() const { return params_; }
  const std::vector<std::pair<int, int>>& bonds() const { return bonds_; }
  const std::vector<int>& orbitals() const { return orbitals_; }
  std::size_t sector_cap() const { return sector_cap_; }

  /// Local dimensions with an optional core hole at `core_site`.
  std::vector<int> sector_dims(std::optional<int> core_site) const;
  CMatrix valence_hamiltonian() const;
  CMatrix intermediate_hamiltonian(int core_site) const;

  /// Dipole matrix (6 x 2 n_orb) on the active orbitals, spin-major.
  angular::DipoleMatrix dipole(const geometry::PolarizationVector& eps) const;

  /// Canonical text form; used as a cache key.
  std::string describe() const;

 private:
  manybody::LatticeSpec lattice_;
  ClusterParams params_;
  std::size_t sector_cap_;
  std::vector<std::pair<int, int>> bonds_;
  std::vector<int> orbitals_;
};

struct SpectralDecomposition {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors;

  double ground_energy() const { return eigenvalues[0]; }
  double bandwidth() const { return eigenvalues[eigenvalues.size() - 1] - eigenvalues[0]; }
  CVector ground_state() const { return eigenvectors.col(0); }
};

/// `core_site` empty = valence sector. Throws ResourceError above the cap.
SpectralDecomposition diagonalize(const ClusterModel& model, std::optional<int> core_site);

/// Valence sector plus one core-hole sector per site, computed once.
struct ModelDecompositions {
  SpectralDecomposition valence;
  std::vector<SpectralDecomposition> core;
};
ModelDecompositions decompose(const ClusterModel& model, unsigned threads = 1);

/// Kramers-Heisenberg final state
/// sum_j e^{i q r_j} D_j(s)^dagger (H' - E_G - omega_in - i gamma)^{-1} D_j(i) |G>.
CVector final_state(const ClusterModel& model, const ModelDecompositions& decomp,
                    const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s,
                    double q_chain, double omega_in, double gamma);

/// The short-lifetime limit i T_q |G> / gamma.
CVector ucl_final_state(const ClusterModel& model, const ModelDecompositions& decomp,
                        const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s,
                        double q_chain, double gamma);

struct Pole {
  double omega = 0.0;
  double weight = 0.0;
};

struct Sample {
  double omega = 0.0;
  double intensity = 0.0;
};

struct SpectrumMeta {
  double q_chain = 0.0;
  std::string eps_i;
  std::string eps_s;
  double omega_in = 0.0;
  double gamma = 0.0;
};

enum class SpectrumKind { poles, sampled };

struct Spectrum {
  SpectrumKind kind = SpectrumKind::poles;
  std::vector<Pole> poles;      // ascending in omega
  std::vector<Sample> samples;  // ascending in omega
  SpectrumMeta meta;
  bool has_meta = true;
  /// Poles at or below this energy are elastic and excluded from Stokes sums.
  double omega_cut = 0.0;
  /// Number of negative sampled intensities clipped to zero on load.
  int clipped = 0;
  /// Ground-state multiplicity detected when the poles were built.
  int ground_degeneracy = 1;

  /// Total weight (pole sum, or trapezoid over all samples).
  double total_weight() const;
  /// Weight at omega > 0: poles above omega_cut, or trapezoid over omega > 0.
  double stokes_weight() const;
};

/// Poles omega_n = E_n - E_G with weights |<n|final>|^2.
Spectrum spectrum(const CVector& final, const SpectralDecomposition& valence, SpectrumMeta meta);

/// gamma^2 * stokes weight.
double stokes_integral(const Spectrum& spec, double gamma);

/// Throws DomainError unless rev is the conjugate measurement of fwd:
/// q -> -q, polarizations swapped, same gamma (when metadata is present).
void check_conjugate_pair(const Spectrum& fwd, const Spectrum& rev, double gamma);

/// 2 gamma^2 (stokes(fwd) + stokes(rev)).
double qfi_from_spectra(const Spectrum& fwd, const Spectrum& rev, double gamma);

/// Incoherent sum_c w_c I_c. Weights non-negative and summing to 1 within 1e-12.
Spectrum mixed_spectrum(std::span<const Spectrum> specs, std::span<const double> weights);

/// Lorentzian rendering with half-width eta on an evenly spaced grid.
Spectrum broaden(const Spectrum& spec, double eta, double omega_min, double omega_max,
                 std::size_t points);

/// CSV (`omega,weight` after a `# poles` line, or `omega,intensity`) plus a
/// JSON sidecar next to it with the same stem.
void write_spectrum_csv(std::ostream& out, const Spectrum& spec);
std::string spectrum_meta_json(const Spectrum& spec);
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
void save_spectrum(const std::filesystem::path& csv, const Spectrum& spec);

/// Binary decomposition cache (little-endian doubles).
void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& d);
std::optional<SpectralDecomposition> load_decomposition(const std::filesystem::path& path);

}  // namespace qfi::rixssim
