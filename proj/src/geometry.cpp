#include "qfi_rixs/geometry.hpp"

#include <cmath>
#include <string>

namespace qfi::geometry {

namespace {

Vec3 rotate_z(const Vec3& v, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

BeamGeometry BeamGeometry::from_radians(double theta_i, double theta_s, double phi, double k_in,
                                        double k_out) {
  require(std::isfinite(theta_i) && theta_i >= 0.0 && theta_i <= kPi / 2,
          "theta_i must lie in [0, pi/2], got " + std::to_string(theta_i));
  require(std::isfinite(theta_s) && theta_s >= 0.0 && theta_s <= kPi / 2,
          "theta_s must lie in [0, pi/2], got " + std::to_string(theta_s));
  require(std::isfinite(phi) && phi >= 0.0 && phi < 2 * kPi,
          "phi must lie in [0, 2 pi), got " + std::to_string(phi));
  require(std::isfinite(k_in) && k_in > 0.0, "k_in must be positive");
  require(std::isfinite(k_out) && k_out > 0.0, "k_out must be positive");
  return BeamGeometry(theta_i, theta_s, phi, k_in, k_out);
}

BeamGeometry BeamGeometry::from_degrees(double theta_i_deg, double theta_s_deg, double phi_deg,
                                        double k_in, double k_out) {
  require(theta_i_deg >= 0.0 && theta_i_deg <= 90.0, "theta_i_deg must lie in [0, 90]");
  require(theta_s_deg >= 0.0 && theta_s_deg <= 90.0, "theta_s_deg must lie in [0, 90]");
  require(phi_deg >= 0.0 && phi_deg < 360.0, "phi_deg must lie in [0, 360)");
  // Exact endpoints survive the degree conversion.
  const auto rad = [](double deg) { return deg == 90.0 ? kPi / 2 : deg * kPi / 180.0; };
  return from_radians(rad(theta_i_deg), rad(theta_s_deg), phi_deg * kPi / 180.0, k_in, k_out);
}

PolarizationVector::PolarizationVector(const CVec3& v) : v_(v) {
  const double n2 = v.squaredNorm();
  if (!(std::abs(n2 - 1.0) <= 1e-12)) {
    throw DomainError("polarization vector must have unit norm, |v|^2 = " + std::to_string(n2));
  }
}

PolarizationVector PolarizationVector::normalized(const CVec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero polarization");
  return PolarizationVector(v / n);
}

std::pair<Vec3, Vec3> beam_directions(const BeamGeometry& geom) {
  const Vec3 ki{std::cos(geom.theta_i()), 0.0, -std::sin(geom.theta_i())};
  const Vec3 ks{-std::cos(geom.theta_s()), 0.0, -std::sin(geom.theta_s())};
  return {rotate_z(ki, geom.phi()), rotate_z(ks, geom.phi())};
}

PolarizationVector polarization_vector(const BeamGeometry& geom, Beam beam, PolLabel label) {
  const Vec3 sigma = rotate_z(Vec3::UnitY(), geom.phi());
  if (label == PolLabel::sigma) return PolarizationVector(sigma.cast<cplx>());
  const auto [ki, ks] = beam_directions(geom);
  const Vec3 k = beam == Beam::incident ? ki : ks;
  return PolarizationVector::normalized(k.cross(sigma).cast<cplx>());
}

MomentumTransfer momentum_transfer(const BeamGeometry& geom, const Vec3& lattice_direction) {
  if (std::abs(lattice_direction.norm() - 1.0) > 1e-12) {
    throw DomainError("lattice direction must be a unit vector");
  }
  const auto [ki, ks] = beam_directions(geom);
  MomentumTransfer mt;
  mt.q = geom.k_in() * ki - geom.k_out() * ks;
  mt.q_chain = mt.q.dot(lattice_direction);
  return mt;
}

}  // namespace qfi::geometry
