#include "doctest.h"
#include "oracles.hpp"
#include "qfi_rixs/geometry.hpp"
#include "qfi_rixs/scattering.hpp"

#include <cmath>
#include <random>

using namespace qfi;
using namespace qfi::scattering;
using geometry::Beam;
using geometry::PolLabel;

namespace {

angular::DipoleMatrix wrap(const CMatrix& m) { return {m, std::nullopt, 1.0}; }

TMatrix random_t(std::mt19937_64& rng, int d = 10) { return {oracle::random_matrix(d, d, rng), {}, {}}; }

}  // namespace

TEST_CASE("t_matrix matches the explicit triple loop") {
  std::mt19937_64 rng(1);
  const CMatrix mi = oracle::random_matrix(6, 10, rng);
  const CMatrix ms = oracle::random_matrix(6, 10, rng);
  const auto t = t_matrix(wrap(mi), wrap(ms)).entries;
  double worst = 0.0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      cplx sum = 0.0;
      for (int g = 0; g < 6; ++g) sum += std::conj(ms(g, a)) * mi(g, b);
      worst = std::max(worst, std::abs(t(a, b) - sum) / std::max(1.0, std::abs(sum)));
    }
  }
  CHECK(worst < 1e-14);
  CHECK_THROWS_AS(t_matrix(wrap(mi), wrap(oracle::random_matrix(5, 10, rng))), DomainError);
}

TEST_CASE("equal polarizations give a Hermitian PSD T") {
  std::mt19937_64 rng(2);
  const CMatrix m = oracle::random_matrix(6, 10, rng);
  const auto t = t_matrix(wrap(m), wrap(m)).entries;
  CHECK(max_asymmetry(t) < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(t);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("adjoint identity over an angle grid") {
  const auto basis = angular::OrbitalBasis::l_edge_3d();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const auto g = geometry::BeamGeometry::from_radians(kPi / 2 * i / 19, kPi / 2 * j / 19, 0.0);
      for (auto li : {PolLabel::pi, PolLabel::sigma}) {
        for (auto ls : {PolLabel::pi, PolLabel::sigma}) {
          const auto mi = angular::dipole_matrix(geometry::polarization_vector(g, Beam::incident, li), basis);
          const auto ms = angular::dipole_matrix(geometry::polarization_vector(g, Beam::scattered, ls), basis);
          const CMatrix d = t_matrix(ms, mi).entries - t_matrix(mi, ms).entries.adjoint();
          worst = std::max(worst, d.cwiseAbs().maxCoeff());
        }
      }
    }
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("conjugate_t") {
  std::mt19937_64 rng(3);
  const auto t = random_t(rng);
  CHECK(conjugate_t(conjugate_t(t)).entries == t.entries);
  CHECK(std::abs(conjugate_t(t).entries.trace() - std::conj(t.entries.trace())) < 1e-14);
  const CMatrix herm = t.entries + t.entries.adjoint();
  CHECK(conjugate_t({herm, {}, {}}).entries == herm);
}

TEST_CASE("optimal phase nullifies the third term") {
  CHECK(optimal_phase(1.0) == doctest::Approx(kPi / 4));
  CHECK(std::abs(optimal_phase(cplx(0, 1))) < 1e-15);
  CHECK(optimal_phase(0.0) == doctest::Approx(kPi / 4));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const cplx z(g(rng), g(rng));
    const double phase = optimal_phase(z);
    CHECK(phase >= 0.0);
    CHECK(phase < kPi);
    CHECK(std::abs((std::polar(1.0, 2 * phase) * z).real()) < 1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("local generator") {
  std::mt19937_64 rng(5);
  const CMatrix a = oracle::random_matrix(10, 10, rng);
  const TMatrix herm{a + a.adjoint(), {}, {}};
  CHECK((local_generator(herm, 0.0, 0.0, 0.0).entries - 2.0 * herm.entries).cwiseAbs().maxCoeff() < 1e-14);

  const auto t = random_t(rng);
  const CMatrix g0 = local_generator(t, 0.3, 2.0, 0.1).entries;
  const CMatrix gpi = local_generator(t, 0.3, 2.0, 0.1 + kPi).entries;
  CHECK((g0 + gpi).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(local_generator(t, 0.3, 2.0, 0.1, 4).site_index == 4);

  for (int i = 0; i < 100; ++i) {
    const auto h = local_generator(random_t(rng), 1.7, i, 0.4).entries;
    CHECK(max_asymmetry(h) < 1e-14);
    Eigen::ComplexEigenSolver<CMatrix> es(h);
    CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("eigenvalue spread") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  CHECK(eigenvalue_spread(d) == doctest::Approx(2.0));
  CHECK(std::abs(eigenvalue_spread(CMatrix::Identity(5, 5))) < 1e-15);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigenvalue_spread(bad), DomainError);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const CMatrix a = oracle::random_matrix(6, 6, rng);
    const CMatrix h = a + a.adjoint();
    const CMatrix u = oracle::haar_unitary(6, rng);
    const CMatrix rotated = u * h * u.adjoint();
    const CMatrix sym = 0.5 * (rotated + rotated.adjoint());
    CHECK(std::abs(eigenvalue_spread(sym) - eigenvalue_spread(h)) < 1e-10);
  }
}

TEST_CASE("local spread does not depend on the valence frame") {
  const auto sph = angular::OrbitalBasis::l_edge_3d(angular::ValenceFrame::spherical);
  const auto cub = angular::OrbitalBasis::l_edge_3d(angular::ValenceFrame::cubic);
  const auto g = geometry::BeamGeometry::from_degrees(20, 55, 30);
  const auto ei = geometry::polarization_vector(g, Beam::incident, PolLabel::pi);
  const auto es = geometry::polarization_vector(g, Beam::scattered, PolLabel::sigma);
  const auto t1 = t_matrix(angular::dipole_matrix(ei, sph), angular::dipole_matrix(es, sph));
  const auto t2 = t_matrix(angular::dipole_matrix(ei, cub), angular::dipole_matrix(es, cub));
  CHECK(std::abs(eigenvalue_spread(local_generator(t1, 1.0, 0.0, 0.3).entries) -
                 eigenvalue_spread(local_generator(t2, 1.0, 0.0, 0.3).entries)) < 1e-10);
}

TEST_CASE("assembled generator is Hermitian and matches the Kronecker form") {
  std::mt19937_64 rng(7);
  const auto t = random_t(rng, 3);
  HermitianGenerator gen{t, 0.8, 0.25, {0.0, 1.0, 2.0}};
  const CMatrix o = gen.assemble();
  CHECK(max_asymmetry(o) < 1e-12);
  const CMatrix tq = oracle::dense_t_q(t.entries, gen.site_positions, gen.q_chain);
  const CMatrix ref = (std::polar(1.0, gen.phase) * tq + std::polar(1.0, -gen.phase) * tq.adjoint()) / std::sqrt(2.0);
  CHECK((o - ref).cwiseAbs().maxCoeff() < 1e-12);
}
