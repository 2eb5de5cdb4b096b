#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfi_rixs/geometry.hpp"
#include "qfi_rixs/types.hpp"

namespace qfi::angular {

/// Half-integer quantum number stored as twice its value.
struct HalfInt {
  int twice = 0;

  static constexpr HalfInt whole(int v) { return {2 * v}; }
  static constexpr HalfInt half(int numerator) { return {numerator}; }
  /// Rounds to the nearest half-integer; throws DomainError if v is not one.
  static HalfInt from_double(double v);
  double value() const { return 0.5 * twice; }
  friend bool operator==(HalfInt, HalfInt) = default;
};

/// Condon-Shortley <j1 m1; j2 m2 | J M> from the Racah closed form.
/// Vanishes exactly when m1 + m2 != M or the triangle rule fails.
/// Throws DomainError for |m| > j or mismatched integer/half-integer parity.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

/// <l' m'| C^1_q | l m> with C^k = sqrt(4 pi / (2k+1)) Y_k.
double gaunt_c1(int lp, int mp, int l, int m, int q);

/// Coefficients (c_{-1}, c_0, c_{+1}) with eps . r = sum_q c_q r_q, where
/// r_q are the spherical components of r. Equivalently c_q = (-1)^q eps_{-q}.
std::array<cplx, 3> spherical_tensor_components(const geometry::PolarizationVector& eps);

enum class Spin { up, down };
enum class ValenceFrame { spherical, cubic };

struct SpinOrbital {
  int n = 0;
  int l = 0;
  int ml = 0;
  Spin spin = Spin::up;
  friend bool operator==(const SpinOrbital&, const SpinOrbital&) = default;
};

/// Core and valence spin-orbitals, both listed spin-major (all up, then all
/// down). In the cubic frame `valence_transform` holds the unitary whose
/// columns express the real orbitals in the spherical m-basis; the valence
/// entries then carry the real-harmonic index in `ml`.
struct OrbitalBasis {
  std::vector<SpinOrbital> core;
  std::vector<SpinOrbital> valence;
  ValenceFrame frame = ValenceFrame::spherical;
  CMatrix valence_transform;

  /// 2p core (6) and 3d valence (10): the copper L-edge default.
  static OrbitalBasis l_edge_3d(ValenceFrame frame = ValenceFrame::spherical);
  /// Throws DomainError on duplicates, |ml| > l, or a non-unitary transform.
  void validate() const;
};

/// Columns are the real (tesseral) harmonics m_r = -l..l in the complex basis
/// Y_{l,-l..l}. For l = 2 the order is xy, yz, z2, xz, x2-y2.
CMatrix real_harmonic_transform(int l);
std::string cubic_orbital_name(int l, int m_real);

struct DipoleMatrix {
  CMatrix entries;  // |core| x |valence|
  std::optional<geometry::PolarizationVector> polarization;
  double radial_integral = 1.0;
};

/// Dipole-allowed core <- valence amplitudes for polarization eps on the
/// atomic (spherical-harmonic) orbitals.
DipoleMatrix dipole_matrix(const geometry::PolarizationVector& eps, const OrbitalBasis& basis,
                           double radial = 1.0);

/// Keeps the listed valence columns (e.g. an orbital subset for a cluster model).
DipoleMatrix restrict_valence(const DipoleMatrix& m, std::span<const int> columns);

/// Dipole data as exchanged through files: the matrices for the incident and
/// scattered polarization, and optionally the Cartesian matrices M(x), M(y),
/// M(z), from which M(eps) = sum_a eps_a M(e_a) follows by linearity.
struct DipoleFile {
  OrbitalBasis basis;
  double radial_integral = 1.0;
  DipoleMatrix eps_i;
  DipoleMatrix eps_s;
  std::optional<std::array<CMatrix, 3>> cartesian;
};

DipoleFile load_dipole_matrix(const std::filesystem::path& path);
DipoleFile parse_dipole_json(const std::string& text);
std::string dump_dipole_json(const DipoleFile& file);
void save_dipole_matrix(const std::filesystem::path& path, const DipoleFile& file);

/// M(eps) from Cartesian data.
CMatrix dipole_from_cartesian(const std::array<CMatrix, 3>& cartesian,
                              const geometry::PolarizationVector& eps);

}  // namespace qfi::angular
