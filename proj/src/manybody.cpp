#include "qfi_rixs/manybody.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "json.hpp"

namespace qfi::manybody {

LatticeSpec LatticeSpec::chain(int n_sites, int n_orb) {
  LatticeSpec l;
  l.n_sites = n_sites;
  l.n_orb = n_orb;
  l.site_positions.resize(static_cast<std::size_t>(std::max(n_sites, 0)));
  std::iota(l.site_positions.begin(), l.site_positions.end(), 0.0);
  return l;
}

std::size_t LatticeSpec::total_dim() const {
  std::size_t dim = 1;
  for (int j = 0; j < n_sites; ++j) {
    dim *= static_cast<std::size_t>(local_dim());
    if (dim > dimension_cap) {
      throw ResourceError("state dimension " + std::to_string(local_dim()) + "^" +
                          std::to_string(n_sites) + " exceeds the cap of " +
                          std::to_string(dimension_cap));
    }
  }
  return dim;
}

void LatticeSpec::validate() const {
  if (n_sites < 1) throw DomainError("lattice needs at least one site");
  if (n_orb < 1) throw DomainError("lattice needs at least one orbital per site");
  if (static_cast<int>(site_positions.size()) != n_sites) {
    throw DomainError("site_positions must list one position per site");
  }
  (void)total_dim();
}

int PartitionSpec::k() const {
  std::size_t k = 0;
  for (const auto& b : blocks) k = std::max(k, b.size());
  return static_cast<int>(k);
}

void PartitionSpec::validate(int n_sites) const {
  std::vector<int> seen(static_cast<std::size_t>(n_sites), 0);
  for (const auto& b : blocks) {
    if (b.empty()) throw DomainError("partition contains an empty block");
    for (int s : b) {
      if (s < 0 || s >= n_sites) throw DomainError("partition references a site out of range");
      if (seen[static_cast<std::size_t>(s)]++) throw DomainError("partition blocks overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DomainError("partition does not cover every site");
  }
}

PartitionSpec PartitionSpec::singletons(int n_sites) {
  PartitionSpec p;
  for (int j = 0; j < n_sites; ++j) p.blocks.push_back({j});
  return p;
}

PartitionSpec PartitionSpec::whole(int n_sites) {
  PartitionSpec p;
  p.blocks.emplace_back(static_cast<std::size_t>(n_sites));
  std::iota(p.blocks[0].begin(), p.blocks[0].end(), 0);
  return p;
}

ManyBodyState::ManyBodyState(CVector amplitudes, LatticeSpec lattice)
    : amplitudes_(std::move(amplitudes)), lattice_(std::move(lattice)) {
  lattice_.validate();
  if (static_cast<std::size_t>(amplitudes_.size()) != lattice_.total_dim()) {
    throw DomainError("amplitude vector length does not match the lattice");
  }
  const double n = amplitudes_.norm();
  if (std::abs(n - 1.0) > 1e-10) {
    throw DomainError("many-body state is not normalized, |psi| = " + std::to_string(n));
  }
}

namespace {

CVector gaussian_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[i] = {re, im};
  }
  return v / v.norm();
}

// Assembles the full amplitude vector of a product over (possibly
// non-contiguous) blocks; block amplitudes are indexed by the block's sites in
// ascending order.
CVector block_product(const LatticeSpec& lattice, const std::vector<std::vector<int>>& blocks,
                      const std::vector<CVector>& block_states) {
  const int n = lattice.n_sites;
  const auto d = static_cast<std::size_t>(lattice.local_dim());
  const std::size_t dim = lattice.total_dim();
  CVector out(static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> digits(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t rest = idx;
    for (int j = n - 1; j >= 0; --j) {
      digits[static_cast<std::size_t>(j)] = rest % d;
      rest /= d;
    }
    cplx amp = 1.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      std::size_t local = 0;
      for (int s : blocks[b]) local = local * d + digits[static_cast<std::size_t>(s)];
      amp *= block_states[b][static_cast<Eigen::Index>(local)];
    }
    out[static_cast<Eigen::Index>(idx)] = amp;
  }
  return out;
}

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= base;
  return r;
}

}  // namespace

ManyBodyState random_k_producible_state(const LatticeSpec& lattice, const PartitionSpec& partition,
                                        std::uint64_t seed) {
  lattice.validate();
  partition.validate(lattice.n_sites);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> blocks = partition.blocks;
  std::vector<CVector> states;
  for (auto& b : blocks) {
    std::sort(b.begin(), b.end());
    states.push_back(gaussian_vector(ipow(static_cast<std::size_t>(lattice.local_dim()), b.size()), rng));
  }
  CVector amps = block_product(lattice, blocks, states);
  amps /= amps.norm();
  return {std::move(amps), lattice};
}

PartitionSpec random_partition(int n_sites, int k, std::uint64_t seed) {
  if (k < 1 || n_sites < 1) throw DomainError("random_partition needs n_sites >= 1 and k >= 1");
  std::mt19937_64 rng(seed);
  std::vector<int> sites(static_cast<std::size_t>(n_sites));
  std::iota(sites.begin(), sites.end(), 0);
  std::shuffle(sites.begin(), sites.end(), rng);
  PartitionSpec p;
  std::size_t pos = 0;
  auto take = [&](std::size_t size) {
    p.blocks.emplace_back(sites.begin() + static_cast<std::ptrdiff_t>(pos),
                          sites.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  };
  take(static_cast<std::size_t>(std::min(k, n_sites)));
  while (pos < sites.size()) {
    const auto remaining = sites.size() - pos;
    std::uniform_int_distribution<std::size_t> size(1, std::min<std::size_t>(k, remaining));
    take(size(rng));
  }
  return p;
}

ManyBodyState product_state(const LatticeSpec& lattice, std::span<const CVector> local_states) {
  lattice.validate();
  if (static_cast<int>(local_states.size()) != lattice.n_sites) {
    throw DomainError("product_state needs one local vector per site");
  }
  std::vector<std::vector<int>> blocks;
  std::vector<CVector> states;
  for (int j = 0; j < lattice.n_sites; ++j) {
    const auto& v = local_states[static_cast<std::size_t>(j)];
    if (v.size() != lattice.local_dim()) throw DomainError("local state has the wrong dimension");
    blocks.push_back({j});
    states.push_back(v);
  }
  return {block_product(lattice, blocks, states), lattice};
}

CVector apply_local(const CVector& v, std::span<const int> dims, int site, const CMatrix& op) {
  if (site < 0 || site >= static_cast<int>(dims.size())) throw DomainError("site out of range");
  Eigen::Index left = 1;
  Eigen::Index right = 1;
  for (int s = 0; s < static_cast<int>(dims.size()); ++s) {
    if (s < site) left *= dims[static_cast<std::size_t>(s)];
    if (s > site) right *= dims[static_cast<std::size_t>(s)];
  }
  const Eigen::Index din = dims[static_cast<std::size_t>(site)];
  if (op.cols() != din) throw DomainError("local operator does not match the site dimension");
  if (v.size() != left * din * right) throw DomainError("vector does not match the product space");
  const Eigen::Index dout = op.rows();
  CVector out(left * dout * right);
  const CMatrix opt = op.transpose();
  for (Eigen::Index l = 0; l < left; ++l) {
    Eigen::Map<const CMatrix> in_block(v.data() + l * din * right, right, din);
    Eigen::Map<CMatrix> out_block(out.data() + l * dout * right, right, dout);
    out_block.noalias() = in_block * opt;
  }
  return out;
}

namespace {

CVector apply_sum(const CVector& v, const LatticeSpec& lattice, const CMatrix& op, double q_chain,
                  double sign) {
  const int d = lattice.local_dim();
  if (op.rows() != d || op.cols() != d) {
    throw DomainError("T matrix dimension " + std::to_string(op.rows()) +
                      " does not match the local dimension " + std::to_string(d));
  }
  const std::vector<int> dims(static_cast<std::size_t>(lattice.n_sites), d);
  CVector out = CVector::Zero(v.size());
  for (int j = 0; j < lattice.n_sites; ++j) {
    const cplx ph = std::polar(1.0, sign * q_chain * lattice.site_positions[static_cast<std::size_t>(j)]);
    out += ph * apply_local(v, dims, j, op);
  }
  return out;
}

}  // namespace

CVector apply_t_q(const CVector& v, const LatticeSpec& lattice, const CMatrix& t, double q_chain) {
  return apply_sum(v, lattice, t, q_chain, +1.0);
}

CVector apply_t_q(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain) {
  return apply_t_q(state.amplitudes(), state.lattice(), t.entries, q_chain);
}

CVector apply_t_q_dagger(const CVector& v, const LatticeSpec& lattice, const CMatrix& t,
                         double q_chain) {
  return apply_sum(v, lattice, t.adjoint(), q_chain, -1.0);
}

cplx t_sq_expectation(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain) {
  const CVector once = apply_t_q(state, t, q_chain);
  const CVector twice = apply_t_q(once, state.lattice(), t.entries, q_chain);
  return state.amplitudes().dot(twice);
}

double qfi_pure(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain,
                double phase) {
  const auto& psi = state.amplitudes();
  const cplx u = std::polar(1.0, phase);
  const CVector o_psi = (u * apply_t_q(psi, state.lattice(), t.entries, q_chain) +
                         std::conj(u) * apply_t_q_dagger(psi, state.lattice(), t.entries, q_chain)) /
                        std::sqrt(2.0);
  const double second = o_psi.squaredNorm();
  const double first = psi.dot(o_psi).real();
  return std::max(0.0, 4.0 * (second - first * first));
}

QfiTerms qfi_terms(const ManyBodyState& state, const scattering::TMatrix& t, double q_chain,
                   double phase) {
  const auto& psi = state.amplitudes();
  const auto& lat = state.lattice();
  const CVector t_psi = apply_t_q(psi, lat, t.entries, q_chain);
  const CVector td_psi = apply_t_q_dagger(psi, lat, t.entries, q_chain);
  QfiTerms r;
  r.t_mean = psi.dot(t_psi);
  r.t_sq = psi.dot(apply_t_q(t_psi, lat, t.entries, q_chain));
  const double mean2 = std::norm(r.t_mean);
  r.stokes_forward = 2.0 * (t_psi.squaredNorm() - mean2);
  r.stokes_reverse = 2.0 * (td_psi.squaredNorm() - mean2);
  const cplx u2 = std::polar(1.0, 2.0 * phase);
  r.phase_term = 4.0 * (u2 * (r.t_sq - r.t_mean * r.t_mean)).real();
  r.phase_term_bare = 4.0 * (u2 * r.t_sq).real();
  return r;
}

double max_qfi_product_states(const LatticeSpec& lattice, const scattering::TMatrix& t,
                              double q_chain, double phase) {
  lattice.validate();
  double total = 0.0;
  for (int j = 0; j < lattice.n_sites; ++j) {
    const auto g = scattering::local_generator(t, q_chain, lattice.site_positions[static_cast<std::size_t>(j)],
                                               phase, j);
    const double spread = scattering::eigenvalue_spread(g.entries) / std::sqrt(2.0);
    total += spread * spread;
  }
  return total;
}

ManyBodyState extremal_product_state(const LatticeSpec& lattice, const scattering::TMatrix& t,
                                     double q_chain, double phase) {
  lattice.validate();
  std::vector<CVector> locals;
  for (int j = 0; j < lattice.n_sites; ++j) {
    const auto g = scattering::local_generator(t, q_chain, lattice.site_positions[static_cast<std::size_t>(j)],
                                               phase, j);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g.entries);
    const auto& vecs = es.eigenvectors();
    locals.push_back((vecs.col(0) + vecs.col(vecs.cols() - 1)) / std::sqrt(2.0));
  }
  return product_state(lattice, locals);
}

void dump_state(const std::filesystem::path& path, const ManyBodyState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write state file " + path.string());
  const auto& lat = state.lattice();
  nlohmann::json header{{"n_sites", lat.n_sites},
                        {"n_orb", lat.n_orb},
                        {"site_positions", lat.site_positions},
                        {"dim", state.amplitudes().size()}};
  out << header.dump() << '\n';
  for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) {
    for (double part : {state.amplitudes()[i].real(), state.amplitudes()[i].imag()}) {
      auto bits = std::bit_cast<std::uint64_t>(part);
      unsigned char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
      out.write(reinterpret_cast<const char*>(bytes), 8);
    }
  }
}

ManyBodyState load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open state file " + path.string());
  std::string line;
  std::getline(in, line);
  LatticeSpec lat;
  std::size_t dim = 0;
  try {
    const auto h = nlohmann::json::parse(line);
    lat.n_sites = h.at("n_sites").get<int>();
    lat.n_orb = h.at("n_orb").get<int>();
    lat.site_positions = h.at("site_positions").get<std::vector<double>>();
    dim = h.at("dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": bad state header: " + e.what());
  }
  CVector amps(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    double parts[2];
    for (double& part : parts) {
      unsigned char bytes[8];
      if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw DataError(path.string() + ": truncated amplitude data");
      }
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
      part = std::bit_cast<double>(bits);
    }
    amps[static_cast<Eigen::Index>(i)] = {parts[0], parts[1]};
  }
  return {std::move(amps), lat};
}

}  // namespace qfi::manybody
