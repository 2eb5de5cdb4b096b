#include "doctest.h"
#include "oracles.hpp"
#include "qfi_rixs/rixssim.hpp"
#include "qfi_rixs/verify.hpp"
#include "qfi_rixs/witness.hpp"

#include <cmath>
#include <random>

using namespace qfi;
using namespace qfi::rixssim;
using geometry::Beam;
using geometry::PolLabel;

namespace {

ClusterModel ring(int n, int n_orb) {
  ClusterParams p;
  p.periodic = true;
  for (int l = 0; l < n_orb; ++l) p.delta_cf.push_back(0.3 * l);
  return ClusterModel(manybody::LatticeSpec::chain(n, n_orb), p);
}

std::pair<angular::DipoleMatrix, angular::DipoleMatrix> channel_dipoles(const ClusterModel& m,
                                                                       double ti, double ts, PolLabel li,
                                                                       PolLabel ls) {
  const auto g = geometry::BeamGeometry::from_radians(ti, ts, 0.2);
  return {m.dipole(geometry::polarization_vector(g, Beam::incident, li)),
          m.dipole(geometry::polarization_vector(g, Beam::scattered, ls))};
}

CMatrix embed(const CMatrix& op, const std::vector<int>& dims, int site) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t s = 0; s < dims.size(); ++s) {
    out = oracle::kron(out, static_cast<int>(s) == site ? op : CMatrix::Identity(dims[s], dims[s]));
  }
  return out;
}

}  // namespace

TEST_CASE("model construction") {
  const auto m = ring(3, 2);
  CHECK(m.bonds().size() == 3);
  const auto open = ClusterModel(manybody::LatticeSpec::chain(3, 2), ClusterParams{});
  CHECK(open.bonds().size() == 2);
  CHECK(m.sector_dims(std::nullopt) == std::vector<int>{4, 4, 4});
  CHECK(m.sector_dims(1) == std::vector<int>{4, 6, 4});
  CHECK(max_asymmetry(m.valence_hamiltonian()) < 1e-14);
  CHECK(max_asymmetry(m.intermediate_hamiltonian(2)) < 1e-14);
  CHECK(m.dipole(geometry::PolarizationVector(CVec3(0, 0, 1))).entries.rows() == 6);
  CHECK(m.dipole(geometry::PolarizationVector(CVec3(0, 0, 1))).entries.cols() == 4);
  ClusterParams bad;
  bad.delta_cf = {0.1};
  CHECK_THROWS_AS(ClusterModel(manybody::LatticeSpec::chain(2, 2), bad), ConfigError);
}

TEST_CASE("sector cap") {
  const ClusterModel big(manybody::LatticeSpec::chain(4, 5), ClusterParams{});
  try {
    diagonalize(big, std::nullopt);
    FAIL("expected a resource error");
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("4096") != std::string::npos);
  }
}

TEST_CASE("diagonalization") {
  ClusterParams flat;
  flat.J_s = 0.0;
  flat.J_so = 0.0;
  flat.field = Vec3::Zero();
  const auto d0 = diagonalize(ClusterModel(manybody::LatticeSpec::chain(2, 2), flat), std::nullopt);
  CHECK(d0.bandwidth() < 1e-14);

  ClusterParams heis;
  heis.J_s = 1.7;
  heis.J_so = 0.0;
  heis.field = Vec3::Zero();
  const auto d = diagonalize(ClusterModel(manybody::LatticeSpec::chain(2, 1), heis), std::nullopt);
  CHECK(d.eigenvalues.size() == 4);
  CHECK(d.eigenvalues[0] == doctest::Approx(-0.75 * 1.7));
  CHECK(d.eigenvalues[1] - d.eigenvalues[0] == doctest::Approx(1.7));
  CHECK(d.eigenvalues[3] == doctest::Approx(d.eigenvalues[1]));

  const auto m = ring(3, 2);
  for (std::optional<int> sector : {std::optional<int>{}, std::optional<int>{0}}) {
    const auto dec = diagonalize(m, sector);
    const auto n = dec.eigenvectors.cols();
    CHECK((dec.eigenvectors.adjoint() * dec.eigenvectors - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Kramers-Heisenberg final state matches a dense resolvent") {
  for (int n : {1, 2}) {
    const auto m = ring(n, 2);
    const auto dec = decompose(m);
    const auto [mi, ms] = channel_dipoles(m, 0.3, 1.1, PolLabel::pi, PolLabel::sigma);
    const double q = n == 1 ? 0.0 : 0.7;
    const double w = 2.6, gamma = 0.4;
    const CVector psi = final_state(m, dec, mi, ms, q, w, gamma);

    const CVector g = dec.valence.ground_state();
    const double eg = dec.valence.ground_energy();
    const auto vdims = m.sector_dims(std::nullopt);
    CVector ref = CVector::Zero(g.size());
    for (int j = 0; j < n; ++j) {
      const auto cdims = m.sector_dims(j);
      const CMatrix di = embed(mi.entries, vdims, j);
      const CMatrix ds = embed(ms.entries.adjoint(), cdims, j);
      const CMatrix h = m.intermediate_hamiltonian(j);
      const CMatrix a = h - cplx(eg + w, gamma) * CMatrix::Identity(h.rows(), h.cols());
      const CVector x = a.partialPivLu().solve(CVector(di * g));
      ref += std::polar(1.0, q * j) * (ds * x);
    }
    CHECK((psi - ref).norm() < 1e-10 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("final state vanishes for zero dipoles") {
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  const angular::DipoleMatrix zero{CMatrix::Zero(6, 4), std::nullopt, 1.0};
  CHECK(final_state(m, dec, zero, zero, 0.3, 3.0, 0.5).norm() == 0.0);
}

TEST_CASE("spectrum of simple final states") {
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  const auto s = spectrum(dec.valence.ground_state(), dec.valence, {});
  CHECK(s.poles.front().omega == doctest::Approx(0.0));
  CHECK(s.poles.front().weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.stokes_weight() < 1e-24);

  std::mt19937_64 rng(1);
  const CVector v = oracle::random_matrix(dec.valence.eigenvalues.size(), 1, rng);
  const auto r = spectrum(v, dec.valence, {});
  CHECK(r.total_weight() == doctest::Approx(v.squaredNorm()).epsilon(1e-12));
  for (const auto& p : r.poles) CHECK(p.weight >= -1e-14);
  CHECK(r.omega_cut == doctest::Approx(1e-9 * dec.valence.bandwidth()));
}

TEST_CASE("Lorentzian rendering conserves the pole sum") {
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  const auto [mi, ms] = channel_dipoles(m, 0.4, 0.9, PolLabel::pi, PolLabel::pi);
  const auto s = spectrum(ucl_final_state(m, dec, mi, ms, kPi, 0.5), dec.valence, {});
  const double bw = dec.valence.bandwidth();
  const double eta = 0.01 * bw;
  const auto b = broaden(s, eta, -1000 * eta, bw + 1000 * eta, 40001);
  CHECK(b.kind == SpectrumKind::sampled);
  CHECK(std::abs(b.total_weight() - s.total_weight()) < 1e-3 * s.total_weight());
}

TEST_CASE("UCL Stokes integral equals the connected correlator") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = verify::random_ring_model(3, 2, rng);
    const auto dec = decompose(m);
    const auto [mi, ms] = channel_dipoles(m, 0.2 + 0.2 * trial, 1.0, PolLabel::sigma, PolLabel::pi);
    const double q = 2 * kPi / 3;
    const double gamma = 0.37;
    const scattering::TMatrix t = scattering::t_matrix(mi, ms);
    const manybody::ManyBodyState g(dec.valence.ground_state(), m.lattice());
    const CVector tg = manybody::apply_t_q(g, t, q);
    const cplx mean = g.amplitudes().dot(tg);
    CHECK(std::abs(mean) < 1e-10);
    const double ref = tg.squaredNorm() - std::norm(mean);
    const auto s = spectrum(ucl_final_state(m, dec, mi, ms, q, gamma), dec.valence, {q, "sigma", "pi", 0.0, gamma});
    CHECK(std::abs(stokes_integral(s, gamma) - ref) < 1e-10 * std::max(1.0, ref));
  }

  // T_q proportional to the identity: |G> is an eigenstate, no inelastic weight.
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  const angular::DipoleMatrix id{CMatrix::Identity(6, 4), std::nullopt, 1.0};
  const auto s = spectrum(ucl_final_state(m, dec, id, id, 0.0, 1.0), dec.valence, {});
  CHECK(stokes_integral(s, 1.0) < 1e-20);
}

TEST_CASE("QFI from spectra: UCL identity and finite gamma") {
  std::mt19937_64 rng(3);
  const auto m = verify::random_ring_model(2, 2, rng);
  const auto dec = decompose(m);
  const auto [mi, ms] = channel_dipoles(m, 0.5, 0.8, PolLabel::pi, PolLabel::sigma);
  const double q = kPi;
  const auto t = scattering::t_matrix(mi, ms);
  const manybody::ManyBodyState g(dec.valence.ground_state(), m.lattice());
  const double phase = scattering::optimal_phase(manybody::t_sq_expectation(g, t, q));
  const double oracle_fq = manybody::qfi_pure(g, t, q, phase);

  const double bw = dec.valence.bandwidth();
  for (double ratio : {0.0, 100.0}) {
    const double gamma = ratio == 0.0 ? 0.5 : ratio * bw;
    const double w = m.params().E_edge;
    const auto fwd_state = ratio == 0.0 ? ucl_final_state(m, dec, mi, ms, q, gamma)
                                        : final_state(m, dec, mi, ms, q, w, gamma);
    const auto rev_state = ratio == 0.0 ? ucl_final_state(m, dec, ms, mi, -q, gamma)
                                        : final_state(m, dec, ms, mi, -q, w, gamma);
    const auto fwd = spectrum(fwd_state, dec.valence, {q, "pi", "sigma", w, gamma});
    const auto rev = spectrum(rev_state, dec.valence, {-q, "sigma", "pi", w, gamma});
    const double fq = qfi_from_spectra(fwd, rev, gamma);
    const double tol = ratio == 0.0 ? 1e-8 : 0.05;
    CHECK(std::abs(fq - oracle_fq) <= tol * oracle_fq);
  }

  Spectrum empty;
  empty.has_meta = false;
  CHECK(qfi_from_spectra(empty, empty, 1.0) == 0.0);
}

TEST_CASE("conjugate pair metadata is enforced") {
  Spectrum a, b;
  a.meta = {1.0, "pi", "sigma", 3.0, 0.5};
  b.meta = {-1.0, "sigma", "pi", 3.0, 0.5};
  CHECK_NOTHROW(check_conjugate_pair(a, b, 0.5));
  CHECK_THROWS_AS(check_conjugate_pair(a, b, 0.6), DomainError);
  b.meta.gamma = 0.7;
  CHECK_THROWS_AS(check_conjugate_pair(a, b, 0.5), DomainError);
  b.meta = {1.0, "sigma", "pi", 3.0, 0.5};
  CHECK_THROWS_AS(check_conjugate_pair(a, b, 0.5), DomainError);
  b.meta = {-1.0, "pi", "sigma", 3.0, 0.5};
  CHECK_THROWS_AS(check_conjugate_pair(a, b, 0.5), DomainError);
}

TEST_CASE("mixed spectrum") {
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  std::vector<Spectrum> specs;
  for (auto [li, ls] : {std::pair{PolLabel::pi, PolLabel::pi}, {PolLabel::pi, PolLabel::sigma},
                        {PolLabel::sigma, PolLabel::pi}, {PolLabel::sigma, PolLabel::sigma}}) {
    const auto [mi, ms] = channel_dipoles(m, 0.4, 0.6, li, ls);
    specs.push_back(spectrum(ucl_final_state(m, dec, mi, ms, kPi, 0.5), dec.valence, {kPi, "", "", 0.0, 0.5}));
  }
  const std::vector<double> one{0.0, 1.0, 0.0, 0.0};
  CHECK(mixed_spectrum(specs, one).total_weight() == doctest::Approx(specs[1].total_weight()).epsilon(1e-14));
  const std::vector<Spectrum> same(4, specs[2]);
  const std::vector<double> equal(4, 0.25);
  CHECK(mixed_spectrum(same, equal).stokes_weight() == doctest::Approx(specs[2].stokes_weight()).epsilon(1e-14));
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  double expect = 0.0;
  for (std::size_t c = 0; c < 4; ++c) expect += w[c] * specs[c].total_weight();
  CHECK(mixed_spectrum(specs, w).total_weight() == doctest::Approx(expect).epsilon(1e-13));
  const std::vector<double> bad{0.5, 0.5, 0.5, -0.5};
  CHECK_THROWS_AS(mixed_spectrum(specs, bad), DomainError);
  const std::vector<double> unnorm{0.3, 0.3, 0.3, 0.3};
  CHECK_THROWS_AS(mixed_spectrum(specs, unnorm), DomainError);
}

TEST_CASE("spectrum files round trip through the witness loader") {
  const auto m = ring(2, 2);
  const auto dec = decompose(m);
  const auto [mi, ms] = channel_dipoles(m, 0.4, 0.6, PolLabel::pi, PolLabel::sigma);
  const auto s = spectrum(ucl_final_state(m, dec, mi, ms, kPi, 0.5), dec.valence, {kPi, "pi", "sigma", 3.0, 0.5});
  save_spectrum("rixssim_poles.csv", s);
  const auto back = witness::load_measured_spectrum("rixssim_poles.csv");
  CHECK(back.has_meta);
  CHECK(back.meta.eps_s == "sigma");
  CHECK(back.meta.gamma == 0.5);
  CHECK(std::abs(back.stokes_weight() - s.stokes_weight()) <= 1e-12 * s.stokes_weight());
  CHECK(sidecar_path("a/b/spec.csv") == std::filesystem::path("a/b/spec.json"));

  const auto b = broaden(s, 0.05, -1.0, 3.0, 401);
  save_spectrum("rixssim_grid.csv", b);
  const auto gb = witness::load_measured_spectrum("rixssim_grid.csv");
  CHECK(gb.kind == SpectrumKind::sampled);
  CHECK(std::abs(gb.total_weight() - b.total_weight()) <= 1e-12 * b.total_weight());
}

TEST_CASE("decomposition cache round trip") {
  const auto m = ring(2, 2);
  const auto d = diagonalize(m, 1);
  save_decomposition("rixssim_cache.bin", d);
  const auto back = load_decomposition("rixssim_cache.bin");
  REQUIRE(back.has_value());
  CHECK(back->eigenvalues == d.eigenvalues);
  CHECK(back->eigenvectors == d.eigenvectors);
  CHECK_FALSE(load_decomposition("no_such_cache.bin").has_value());
}
