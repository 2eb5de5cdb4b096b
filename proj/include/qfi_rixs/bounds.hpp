#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfi_rixs/angular.hpp"
#include "qfi_rixs/geometry.hpp"
#include "qfi_rixs/scattering.hpp"

namespace qfi::bounds {

/// Polarization channel, incident first. `mixed` is the unresolved
/// mixture of all four.
enum class Channel { pi_pi, pi_sigma, sigma_pi, sigma_sigma, mixed };

inline constexpr std::array<Channel, 4> kResolvedChannels = {Channel::pi_pi, Channel::pi_sigma,
                                                             Channel::sigma_pi, Channel::sigma_sigma};

std::string channel_name(Channel c);
/// Accepts "pi-pi", "pi-sigma", "sigma-pi", "sigma-sigma", "mixed".
Channel parse_channel(const std::string& name);
std::pair<geometry::PolLabel, geometry::PolLabel> channel_labels(Channel c);

struct BoundResult {
  int k = 1;
  double value = 0.0;
  std::vector<double> per_site_spreads;
  std::optional<geometry::BeamGeometry> geometry;
  std::pair<std::string, std::string> polarization_labels;
};

struct MixedBoundResult {
  int k = 1;
  double envelope_term = 0.0;
  double offset_term = 0.0;
  double total = 0.0;
};

/// k * sum_j spread(T_bar_j)^2 with T_bar_j the local generator at r_j.
/// Throws DomainError unless 1 <= k <= sites.size().
BoundResult k_producible_bound(const scattering::TMatrix& t, double q_chain,
                               std::span<const double> sites, double phase, int k);

/// Largest eigenvalue of the Hermitian, traceless [T^dagger, T].
double commutator_lambda_max(const CMatrix& t);

/// 2 N max_c lambda_max([T_c^dagger, T_c]).
double commutator_offset(std::span<const scattering::TMatrix> t_set, int n_sites);

/// max_c k_producible_bound(T_c, phase_c) + commutator_offset.
MixedBoundResult mixed_pol_bound(std::span<const scattering::TMatrix> t_set, double q_chain,
                                 std::span<const double> sites, std::span<const double> phases,
                                 int k);

/// Maps a polarization to its dipole matrix: either the atomic
/// Wigner-Eckart construction or imported Cartesian matrices.
class DipoleSource {
 public:
  static DipoleSource atomic(angular::OrbitalBasis basis, double radial = 1.0);
  static DipoleSource cartesian(std::array<CMatrix, 3> matrices, double radial = 1.0);

  angular::DipoleMatrix operator()(const geometry::PolarizationVector& eps) const;

 private:
  std::optional<angular::OrbitalBasis> basis_;
  std::array<CMatrix, 3> cartesian_;
  double radial_ = 1.0;
};

scattering::TMatrix channel_t_matrix(const DipoleSource& source,
                                     const geometry::BeamGeometry& geom, Channel channel);
/// T for (pi,pi), (pi,sigma), (sigma,pi), (sigma,sigma).
std::array<scattering::TMatrix, 4> channel_t_set(const DipoleSource& source,
                                                 const geometry::BeamGeometry& geom);

struct SweepSpec {
  int grid = 50;
  std::vector<Channel> channels{Channel::pi_pi, Channel::pi_sigma};
  std::vector<int> ks{1};
  DipoleSource source = DipoleSource::atomic(angular::OrbitalBasis::l_edge_3d());
  double phi = 0.0;
  double k_in = 1.0;
  double k_out = 1.0;
  Vec3 lattice_direction = Vec3::UnitX();
  /// Default: the per-site bound at r = 0.
  std::vector<double> site_positions{0.0};
  /// <T_q^2> fed to the optimal phase; 0 selects pi/4.
  cplx t_sq = 0.0;
  unsigned threads = 1;
};

struct SweepRow {
  double theta_i_deg = 0.0;
  double theta_s_deg = 0.0;
  Channel channel = Channel::pi_pi;
  int k = 1;
  double bound = 0.0;
  double offset = 0.0;
  double total = 0.0;
};

/// Rows ordered by theta_i, theta_s, channel (as listed), k (as listed).
/// Throws ConfigError for grid < 2 or an empty channel/k list.
std::vector<SweepRow> angular_sweep(const SweepSpec& spec);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
/// Heatmap of `total` over (theta_i, theta_s) for one channel and k.
std::string render_svg(std::span<const SweepRow> rows, Channel channel, int k);

}  // namespace qfi::bounds
