#pragma once

#include <utility>

#include "qfi_rixs/types.hpp"

namespace qfi::geometry {

enum class Beam { incident, scattered };
enum class PolLabel { pi, sigma };

/// Scattering setup. The sample plane is x-y with normal z; at phi = 0 the
/// scattering plane is x-z. Grazing angles are measured from the sample plane
/// on opposite sides, so the beams enclose an angle pi - (theta_i + theta_s).
class BeamGeometry {
 public:
  static BeamGeometry from_radians(double theta_i, double theta_s, double phi, double k_in = 1.0,
                                   double k_out = 1.0);
  static BeamGeometry from_degrees(double theta_i_deg, double theta_s_deg, double phi_deg,
                                   double k_in = 1.0, double k_out = 1.0);

  double theta_i() const { return theta_i_; }
  double theta_s() const { return theta_s_; }
  double phi() const { return phi_; }
  double k_in() const { return k_in_; }
  double k_out() const { return k_out_; }

 private:
  BeamGeometry(double ti, double ts, double phi, double ki, double ks)
      : theta_i_(ti), theta_s_(ts), phi_(phi), k_in_(ki), k_out_(ks) {}

  double theta_i_;
  double theta_s_;
  double phi_;
  double k_in_;
  double k_out_;
};

/// Unit-norm complex 3-vector in the sample frame.
class PolarizationVector {
 public:
  /// Throws DomainError unless |v| = 1 within 1e-12.
  explicit PolarizationVector(const CVec3& v);
  /// Rescales a nonzero vector to unit norm.
  static PolarizationVector normalized(const CVec3& v);

  const CVec3& components() const { return v_; }
  cplx operator[](int i) const { return v_[i]; }

 private:
  CVec3 v_;
};

struct MomentumTransfer {
  Vec3 q;
  double q_chain = 0.0;
};

/// (k_hat_i, k_hat_s).
std::pair<Vec3, Vec3> beam_directions(const BeamGeometry& geom);

PolarizationVector polarization_vector(const BeamGeometry& geom, Beam beam, PolLabel label);

MomentumTransfer momentum_transfer(const BeamGeometry& geom, const Vec3& lattice_direction);

}  // namespace qfi::geometry
