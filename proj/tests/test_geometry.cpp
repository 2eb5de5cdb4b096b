#include "doctest.h"
#include "qfi_rixs/geometry.hpp"

#include <cmath>

using namespace qfi;
using namespace qfi::geometry;

TEST_CASE("beam directions at reference angles") {
  auto [ki, ks] = beam_directions(BeamGeometry::from_radians(0, 0, 0));
  CHECK((ki - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((ks - Vec3(-1, 0, 0)).norm() < 1e-15);

  auto normal = beam_directions(BeamGeometry::from_radians(kPi / 2, 0.3, 0)).first;
  CHECK((normal - Vec3(0, 0, -1)).norm() < 1e-15);

  auto [a, b] = beam_directions(BeamGeometry::from_radians(kPi / 4, kPi / 4, 0));
  CHECK(std::abs(a.dot(b)) < 1e-15);
}

TEST_CASE("beam angle identity holds at every azimuth") {
  for (double phi : {0.0, 0.7, 2.5, 5.9}) {
    for (int i = 0; i <= 9; ++i) {
      for (int j = 0; j <= 9; ++j) {
        const double ti = kPi / 2 * i / 9, ts = kPi / 2 * j / 9;
        auto [ki, ks] = beam_directions(BeamGeometry::from_radians(ti, ts, phi));
        CHECK(ki.dot(ks) == doctest::Approx(-std::cos(ti + ts)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("polarization vectors") {
  for (int i = 0; i <= 9; ++i) {
    for (int j = 0; j <= 9; ++j) {
      const double ti = kPi / 2 * i / 9, ts = kPi / 2 * j / 9;
      const auto g = BeamGeometry::from_radians(ti, ts, 0);
      const auto sig = polarization_vector(g, Beam::incident, PolLabel::sigma).components();
      CHECK((sig - CVec3(0, 1, 0)).norm() < 1e-15);
      const auto pi_i = polarization_vector(g, Beam::incident, PolLabel::pi).components();
      const auto pi_s = polarization_vector(g, Beam::scattered, PolLabel::pi).components();
      CHECK((pi_i - CVec3(std::sin(ti), 0, std::cos(ti))).norm() < 1e-14);
      CHECK((pi_s - CVec3(std::sin(ts), 0, -std::cos(ts))).norm() < 1e-14);
      CHECK(pi_i.dot(pi_s).real() == doctest::Approx(-std::cos(ti + ts)).epsilon(1e-12));
    }
  }
  const auto inc = polarization_vector(BeamGeometry::from_radians(0, 0, 0), Beam::incident, PolLabel::pi);
  CHECK((inc.components() - CVec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("polarizations are transverse and orthogonal") {
  for (double phi : {0.0, 1.1, 3.0}) {
    for (double ti : {0.0, 0.4, 1.2, kPi / 2}) {
      for (double ts : {0.0, 0.9, kPi / 2}) {
        const auto g = BeamGeometry::from_radians(ti, ts, phi);
        const auto [ki, ks] = beam_directions(g);
        for (auto beam : {Beam::incident, Beam::scattered}) {
          const Vec3 k = beam == Beam::incident ? ki : ks;
          const auto p = polarization_vector(g, beam, PolLabel::pi).components();
          const auto s = polarization_vector(g, beam, PolLabel::sigma).components();
          CHECK(std::abs(p.dot(k.cast<cplx>())) < 1e-12);
          CHECK(std::abs(s.dot(k.cast<cplx>())) < 1e-12);
          CHECK(std::abs(p.dot(s)) < 1e-12);
          CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
        const auto s0 = polarization_vector(BeamGeometry::from_radians(0.2, 0.3, phi), Beam::incident,
                                            PolLabel::sigma);
        CHECK((polarization_vector(g, Beam::scattered, PolLabel::sigma).components() - s0.components()).norm() <
              1e-14);
      }
    }
  }
}

TEST_CASE("momentum transfer") {
  const Vec3 x(1, 0, 0);
  auto back = momentum_transfer(BeamGeometry::from_radians(0, 0, 0), x);
  CHECK(back.q.norm() == doctest::Approx(2.0));
  auto mt = momentum_transfer(BeamGeometry::from_radians(kPi / 4, kPi / 4, 0), x);
  CHECK(mt.q_chain == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  // Both beams along -z: forward scattering.
  CHECK(momentum_transfer(BeamGeometry::from_radians(kPi / 2, kPi / 2, 0), x).q.norm() < 1e-15);
  auto scaled = momentum_transfer(BeamGeometry::from_radians(0.3, 0.5, 0, 2.0, 2.0), x);
  auto unit = momentum_transfer(BeamGeometry::from_radians(0.3, 0.5, 0), x);
  CHECK((scaled.q - 2.0 * unit.q).norm() < 1e-14);
  CHECK_THROWS_AS(momentum_transfer(BeamGeometry::from_radians(0.3, 0.5, 0), Vec3(1, 1, 0)), DomainError);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(BeamGeometry::from_degrees(-1, 10, 0), ConfigError);
  CHECK_THROWS_AS(BeamGeometry::from_degrees(10, 91, 0), ConfigError);
  CHECK_THROWS_AS(BeamGeometry::from_degrees(10, 10, 360), ConfigError);
  CHECK_THROWS_AS(BeamGeometry::from_radians(0.1, 0.1, 0, -1.0), ConfigError);
  CHECK(BeamGeometry::from_degrees(90, 0, 0).theta_i() == kPi / 2);
  CHECK_THROWS_AS(PolarizationVector(CVec3(1, 1, 0)), DomainError);
}
