#include "doctest.h"
#include "oracles.hpp"
#include "qfi_rixs/bounds.hpp"
#include "qfi_rixs/manybody.hpp"

#include <cmath>
#include <random>

using namespace qfi;
using namespace qfi::manybody;
using scattering::TMatrix;

namespace {

TMatrix random_t(std::mt19937_64& rng, int d) { return {oracle::random_matrix(d, d, rng), {}, {}}; }

ManyBodyState random_state(const LatticeSpec& lat, std::mt19937_64& rng) {
  return ManyBodyState(oracle::random_unit_vector(static_cast<Eigen::Index>(lat.total_dim()), rng), lat);
}

CMatrix dense_o(const CMatrix& tq, double phase) {
  return (std::polar(1.0, phase) * tq + std::polar(1.0, -phase) * tq.adjoint()) / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("lattice and partition validation") {
  auto lat = LatticeSpec::chain(3, 2);
  CHECK(lat.local_dim() == 4);
  CHECK(lat.total_dim() == 64u);
  CHECK(lat.site_positions == std::vector<double>{0, 1, 2});
  auto big = LatticeSpec::chain(8, 5);
  CHECK_THROWS_AS(big.total_dim(), ResourceError);

  PartitionSpec p{{{0, 2}, {1}}};
  CHECK(p.k() == 2);
  p.validate(3);
  CHECK_THROWS_AS((PartitionSpec{{{0, 1}, {1, 2}}}.validate(3)), DomainError);
  CHECK_THROWS_AS((PartitionSpec{{{0}, {1}}}.validate(3)), DomainError);
  CHECK(PartitionSpec::singletons(4).k() == 1);
  CHECK(PartitionSpec::whole(4).k() == 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = random_partition(4, 3, seed);
    r.validate(4);
    CHECK(r.k() == 3);
  }
}

TEST_CASE("random k-producible states") {
  const auto lat = LatticeSpec::chain(3, 1);
  const auto a = random_k_producible_state(lat, PartitionSpec::singletons(3), 42);
  const auto b = random_k_producible_state(lat, PartitionSpec::singletons(3), 42);
  CHECK(a.amplitudes() == b.amplitudes());
  CHECK(a.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));

  // Product state: the 2 x 4 reshaping across the first cut has rank one.
  Eigen::Map<const CMatrix> cut(a.amplitudes().data(), 4, 2);
  Eigen::JacobiSVD<CMatrix> svd(cut);
  CHECK(svd.singularValues()(1) < 1e-12);

  const auto whole = random_k_producible_state(lat, PartitionSpec::whole(3), 42);
  Eigen::Map<const CMatrix> cut2(whole.amplitudes().data(), 4, 2);
  Eigen::JacobiSVD<CMatrix> svd2(cut2);
  CHECK(svd2.singularValues()(1) > 1e-6);

  CHECK_THROWS_AS(ManyBodyState(CVector::Ones(8), lat), DomainError);
}

TEST_CASE("apply_t_q trivial cases") {
  std::mt19937_64 rng(1);
  const auto lat = LatticeSpec::chain(4, 1);
  const auto psi = random_state(lat, rng);
  const CMatrix id = CMatrix::Identity(2, 2);
  CHECK((apply_t_q(psi.amplitudes(), lat, id, 0.0) - 4.0 * psi.amplitudes()).norm() < 1e-13);
  CHECK(apply_t_q(psi.amplitudes(), lat, id, 2 * kPi / 4).norm() < 1e-13);
  CHECK_THROWS_AS(apply_t_q(psi.amplitudes(), lat, CMatrix::Identity(3, 3), 0.0), DomainError);
}

TEST_CASE("N=2 operators match dense Kronecker constructions") {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_orb = 1 + trial % 3;
    const auto lat = LatticeSpec::chain(2, n_orb);
    const auto t = random_t(rng, lat.local_dim());
    const double q = 2 * kPi * std::uniform_real_distribution<double>()(rng);
    const double phase = kPi * std::uniform_real_distribution<double>()(rng);
    const auto psi = random_state(lat, rng);
    const CMatrix tq = oracle::dense_t_q(t.entries, lat.site_positions, q);
    const CVector& v = psi.amplitudes();

    worst = std::max(worst, (apply_t_q(psi, t, q) - tq * v).cwiseAbs().maxCoeff());
    worst = std::max(worst, (apply_t_q_dagger(v, lat, t.entries, q) - tq.adjoint() * v).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(t_sq_expectation(psi, t, q) - v.dot(tq * (tq * v))));
    const double ref = oracle::four_variance(dense_o(tq, phase), v);
    worst = std::max(worst, std::abs(qfi_pure(psi, t, q, phase) - ref) / std::max(1.0, std::abs(ref)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("apply_local handles rectangular operators") {
  std::mt19937_64 rng(3);
  const std::vector<int> dims{2, 3, 2};
  const CVector v = oracle::random_matrix(12, 1, rng);
  const CMatrix op = oracle::random_matrix(5, 3, rng);
  const CMatrix dense = oracle::kron(oracle::kron(CMatrix::Identity(2, 2), op), CMatrix::Identity(2, 2));
  CHECK((apply_local(v, dims, 1, op) - dense * v).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("t_sq_expectation special cases") {
  const auto lat = LatticeSpec::chain(1, 1);
  CMatrix nil = CMatrix::Zero(2, 2);
  nil(0, 1) = 1.0;
  std::mt19937_64 rng(4);
  const auto psi = random_state(lat, rng);
  CHECK(std::abs(t_sq_expectation(psi, {nil, {}, {}}, 0.0)) < 1e-15);

  const auto lat3 = LatticeSpec::chain(3, 2);
  const CMatrix a = oracle::random_matrix(4, 4, rng);
  const auto psi3 = random_state(lat3, rng);
  CHECK(std::abs(t_sq_expectation(psi3, {a + a.adjoint(), {}, {}}, 0.0).imag()) < 1e-12);
}

TEST_CASE("qfi_pure: cumulant terms equal four times the variance") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto lat = LatticeSpec::chain(2 + trial % 2, 2);
    const auto t = random_t(rng, 4);
    const double q = 0.37 * trial;
    const double phase = 0.011 * trial;
    const auto psi = random_state(lat, rng);
    const double direct = qfi_pure(psi, t, q, phase);
    const auto terms = qfi_terms(psi, t, q, phase);
    CHECK(direct >= 0.0);
    CHECK(std::abs(terms.total() - direct) <= 1e-9 * std::max(1.0, direct));
  }
}

TEST_CASE("qfi_pure vanishes on eigenstates of O") {
  std::mt19937_64 rng(6);
  const auto lat = LatticeSpec::chain(2, 1);
  const auto t = random_t(rng, 2);
  const CMatrix o = dense_o(oracle::dense_t_q(t.entries, lat.site_positions, 0.9), 0.3);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(o);
  const ManyBodyState eig(es.eigenvectors().col(2), lat);
  CHECK(std::abs(qfi_pure(eig, t, 0.9, 0.3)) < 1e-12);
}

TEST_CASE("optimal phase removes the third term on random states") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto lat = LatticeSpec::chain(3, 2);
    const auto t = random_t(rng, 4);
    const auto psi = random_state(lat, rng);
    const double phase = scattering::optimal_phase(t_sq_expectation(psi, t, 1.3));
    CHECK(std::abs(qfi_terms(psi, t, 1.3, phase).phase_term_bare) < 1e-12);
  }
}

TEST_CASE("single-site extremal state saturates the product maximum") {
  std::mt19937_64 rng(8);
  const auto lat = LatticeSpec::chain(1, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = random_t(rng, 10);
    const double spread = scattering::eigenvalue_spread(local_generator(t, 0.0, 0.0, 0.4).entries);
    const auto ext = extremal_product_state(lat, t, 0.0, 0.4);
    CHECK(qfi_pure(ext, t, 0.0, 0.4) == doctest::Approx(spread * spread / 2.0).epsilon(1e-10));
    CHECK(max_qfi_product_states(lat, t, 0.0, 0.4) == doctest::Approx(spread * spread / 2.0).epsilon(1e-12));
  }
  const TMatrix zero{CMatrix::Zero(4, 4), {}, {}};
  CHECK(max_qfi_product_states(LatticeSpec::chain(3, 2), zero, 0.5, 0.1) == 0.0);
}

TEST_CASE("product-state maximum respects the k=1 bound") {
  std::mt19937_64 rng(9);
  const auto lat = LatticeSpec::chain(3, 5);
  const auto source = bounds::DipoleSource::atomic(angular::OrbitalBasis::l_edge_3d());
  std::uniform_real_distribution<double> u(0.0, kPi / 2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = geometry::BeamGeometry::from_radians(u(rng), u(rng), 4 * u(rng) * 0.999);
    const auto t = bounds::channel_t_matrix(source, g, bounds::kResolvedChannels[trial % 4]);
    const double q = 4 * u(rng);
    const double phase = 2 * u(rng) * 0.999;
    const double fmax = max_qfi_product_states(lat, t, q, phase);
    CHECK(fmax <= bounds::k_producible_bound(t, q, lat.site_positions, phase, 1).value * (1 + 1e-12));
    CHECK(qfi_pure(extremal_product_state(lat, t, q, phase), t, q, phase) ==
          doctest::Approx(fmax).epsilon(1e-9));
  }
}

TEST_CASE("QFI is additive over product blocks") {
  std::mt19937_64 rng(10);
  const auto lat = LatticeSpec::chain(3, 1);
  const auto t = random_t(rng, 2);
  std::vector<CVector> locals;
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    locals.push_back(oracle::random_unit_vector(2, rng));
    const auto single = LatticeSpec{1, 1, {lat.site_positions[static_cast<std::size_t>(j)]}};
    sum += qfi_pure(ManyBodyState(locals.back(), single), t, 0.8, 0.2);
  }
  const auto prod = product_state(lat, locals);
  CHECK(qfi_pure(prod, t, 0.8, 0.2) == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("state dump round trip") {
  std::mt19937_64 rng(11);
  const auto lat = LatticeSpec::chain(2, 2);
  const auto psi = random_state(lat, rng);
  dump_state("state_roundtrip.bin", psi);
  const auto back = load_state("state_roundtrip.bin");
  CHECK(back.amplitudes() == psi.amplitudes());
  CHECK(back.lattice().n_sites == 2);
  CHECK(back.lattice().site_positions == lat.site_positions);
}
