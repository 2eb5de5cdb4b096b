#include "qfi_rixs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "qfi_rixs/parallel.hpp"

namespace qfi::bounds {

using geometry::PolLabel;

std::string channel_name(Channel c) {
  switch (c) {
    case Channel::pi_pi: return "pi-pi";
    case Channel::pi_sigma: return "pi-sigma";
    case Channel::sigma_pi: return "sigma-pi";
    case Channel::sigma_sigma: return "sigma-sigma";
    case Channel::mixed: return "mixed";
  }
  return "?";
}

Channel parse_channel(const std::string& name) {
  for (Channel c : {Channel::pi_pi, Channel::pi_sigma, Channel::sigma_pi, Channel::sigma_sigma,
                    Channel::mixed}) {
    if (channel_name(c) == name) return c;
  }
  throw ConfigError("unknown polarization channel \"" + name + "\"");
}

std::pair<PolLabel, PolLabel> channel_labels(Channel c) {
  switch (c) {
    case Channel::pi_pi: return {PolLabel::pi, PolLabel::pi};
    case Channel::pi_sigma: return {PolLabel::pi, PolLabel::sigma};
    case Channel::sigma_pi: return {PolLabel::sigma, PolLabel::pi};
    case Channel::sigma_sigma: return {PolLabel::sigma, PolLabel::sigma};
    case Channel::mixed: break;
  }
  throw DomainError("the mixed channel has no single polarization pair");
}

BoundResult k_producible_bound(const scattering::TMatrix& t, double q_chain,
                               std::span<const double> sites, double phase, int k) {
  const int n = static_cast<int>(sites.size());
  if (k < 1 || k > n) {
    throw DomainError("k = " + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  BoundResult r;
  r.k = k;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto g = scattering::local_generator(t, q_chain, sites[static_cast<std::size_t>(j)], phase, j);
    const double spread = scattering::eigenvalue_spread(g.entries);
    r.per_site_spreads.push_back(spread);
    sum += spread * spread;
  }
  r.value = k * sum;
  return r;
}

double commutator_lambda_max(const CMatrix& t) {
  const CMatrix c = t.adjoint() * t - t * t.adjoint();
  const double scale = std::max(1.0, t.squaredNorm());
  if (std::abs(c.trace()) > 1e-12 * scale) throw DomainError("commutator is not traceless");
  const CMatrix h = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()[es.eigenvalues().size() - 1]);
}

double commutator_offset(std::span<const scattering::TMatrix> t_set, int n_sites) {
  if (t_set.empty()) throw DomainError("commutator_offset needs at least one T matrix");
  if (n_sites < 1) throw DomainError("commutator_offset needs n_sites >= 1");
  double best = 0.0;
  for (const auto& t : t_set) {
    if (t.entries.rows() != t_set[0].entries.rows() || t.entries.cols() != t_set[0].entries.cols()) {
      throw DomainError("T matrices do not share a basis");
    }
    best = std::max(best, commutator_lambda_max(t.entries));
  }
  return 2.0 * n_sites * best;
}

MixedBoundResult mixed_pol_bound(std::span<const scattering::TMatrix> t_set, double q_chain,
                                 std::span<const double> sites, std::span<const double> phases,
                                 int k) {
  if (phases.size() != t_set.size()) throw DomainError("need one phase per polarization config");
  MixedBoundResult r;
  r.k = k;
  for (std::size_t c = 0; c < t_set.size(); ++c) {
    r.envelope_term =
        std::max(r.envelope_term, k_producible_bound(t_set[c], q_chain, sites, phases[c], k).value);
  }
  r.offset_term = commutator_offset(t_set, static_cast<int>(sites.size()));
  r.total = r.envelope_term + r.offset_term;
  return r;
}

DipoleSource DipoleSource::atomic(angular::OrbitalBasis basis, double radial) {
  basis.validate();
  DipoleSource s;
  s.basis_ = std::move(basis);
  s.radial_ = radial;
  return s;
}

DipoleSource DipoleSource::cartesian(std::array<CMatrix, 3> matrices, double radial) {
  for (const auto& m : matrices) {
    if (m.rows() != matrices[0].rows() || m.cols() != matrices[0].cols() || m.size() == 0) {
      throw DomainError("Cartesian dipole matrices must share a non-empty shape");
    }
  }
  DipoleSource s;
  s.cartesian_ = std::move(matrices);
  s.radial_ = radial;
  return s;
}

angular::DipoleMatrix DipoleSource::operator()(const geometry::PolarizationVector& eps) const {
  if (basis_) return angular::dipole_matrix(eps, *basis_, radial_);
  return {angular::dipole_from_cartesian(cartesian_, eps), eps, radial_};
}

scattering::TMatrix channel_t_matrix(const DipoleSource& source,
                                     const geometry::BeamGeometry& geom, Channel channel) {
  const auto [li, ls] = channel_labels(channel);
  const auto ei = geometry::polarization_vector(geom, geometry::Beam::incident, li);
  const auto es = geometry::polarization_vector(geom, geometry::Beam::scattered, ls);
  return scattering::t_matrix(source(ei), source(es));
}

std::array<scattering::TMatrix, 4> channel_t_set(const DipoleSource& source,
                                                 const geometry::BeamGeometry& geom) {
  return {channel_t_matrix(source, geom, Channel::pi_pi),
          channel_t_matrix(source, geom, Channel::pi_sigma),
          channel_t_matrix(source, geom, Channel::sigma_pi),
          channel_t_matrix(source, geom, Channel::sigma_sigma)};
}

std::vector<SweepRow> angular_sweep(const SweepSpec& spec) {
  if (spec.grid < 2) throw ConfigError("sweep grid needs at least 2 points per axis");
  if (spec.channels.empty()) throw ConfigError("sweep needs at least one channel");
  if (spec.ks.empty()) throw ConfigError("sweep needs at least one k");
  const int n = static_cast<int>(spec.site_positions.size());
  if (n < 1) throw ConfigError("sweep needs at least one site");
  for (int k : spec.ks) {
    if (k < 1 || k > n) {
      throw ConfigError("k = " + std::to_string(k) + " outside 1.." + std::to_string(n) +
                        " for " + std::to_string(n) + " site(s)");
    }
  }
  if (std::abs(spec.lattice_direction.norm() - 1.0) > 1e-12) {
    throw ConfigError("lattice_direction must be a unit vector");
  }
  // Validates phi and magnitudes before the grid loop.
  (void)geometry::BeamGeometry::from_radians(0.0, 0.0, spec.phi, spec.k_in, spec.k_out);

  const double phase = scattering::optimal_phase(spec.t_sq);
  const std::size_t g = static_cast<std::size_t>(spec.grid);
  const std::size_t per_point = spec.channels.size() * spec.ks.size();
  std::vector<SweepRow> rows(g * g * per_point);

  parallel_for(g * g, spec.threads, [&](std::size_t point) {
    const std::size_t a = point / g;
    const std::size_t b = point % g;
    // Endpoints are exact so that pi/2 and the anti-diagonals land on the grid.
    const auto angle = [&](std::size_t i) {
      return i + 1 == g ? kPi / 2 : (kPi / 2) * static_cast<double>(i) / static_cast<double>(g - 1);
    };
    const auto geom = geometry::BeamGeometry::from_radians(angle(a), angle(b), spec.phi,
                                                           spec.k_in, spec.k_out);
    const double q = geometry::momentum_transfer(geom, spec.lattice_direction).q_chain;
    const double deg_i = 90.0 * static_cast<double>(a) / static_cast<double>(g - 1);
    const double deg_s = 90.0 * static_cast<double>(b) / static_cast<double>(g - 1);

    std::optional<std::array<scattering::TMatrix, 4>> set;
    std::size_t out = point * per_point;
    for (Channel c : spec.channels) {
      for (int k : spec.ks) {
        SweepRow row{deg_i, deg_s, c, k, 0.0, 0.0, 0.0};
        if (c == Channel::mixed) {
          if (!set) set = channel_t_set(spec.source, geom);
          const std::array<double, 4> phases{phase, phase, phase, phase};
          const auto m = mixed_pol_bound(*set, q, spec.site_positions, phases, k);
          row.bound = m.envelope_term;
          row.offset = m.offset_term;
          row.total = m.total;
        } else {
          const auto t = channel_t_matrix(spec.source, geom, c);
          row.bound = k_producible_bound(t, q, spec.site_positions, phase, k).value;
          row.total = row.bound;
        }
        rows[out++] = row;
      }
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "theta_i_deg,theta_s_deg,channel,k,bound,offset,total\n";
  for (const auto& r : rows) {
    out << format_double(r.theta_i_deg) << ',' << format_double(r.theta_s_deg) << ','
        << channel_name(r.channel) << ',' << r.k << ',' << format_double(r.bound) << ','
        << format_double(r.offset) << ',' << format_double(r.total) << '\n';
  }
}

std::string render_svg(std::span<const SweepRow> rows, Channel channel, int k) {
  std::map<std::pair<double, double>, double> cells;
  std::vector<double> ti;
  std::vector<double> ts;
  for (const auto& r : rows) {
    if (r.channel != channel || r.k != k) continue;
    cells[{r.theta_i_deg, r.theta_s_deg}] = r.total;
    ti.push_back(r.theta_i_deg);
    ts.push_back(r.theta_s_deg);
  }
  std::sort(ti.begin(), ti.end());
  ti.erase(std::unique(ti.begin(), ti.end()), ti.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  double lo = 0.0;
  double hi = 0.0;
  if (!cells.empty()) {
    lo = hi = cells.begin()->second;
    for (const auto& [key, v] : cells) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const int cell = 8;
  const int margin = 40;
  const int w = static_cast<int>(ts.size()) * cell;
  const int h = static_cast<int>(ti.size()) * cell;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 2 * margin << "\" height=\""
      << h + 2 * margin << "\">\n";
  svg << "<text x=\"" << margin << "\" y=\"20\" font-size=\"12\">" << channel_name(channel)
      << " k=" << k << " [" << format_double(lo) << ", " << format_double(hi) << "]</text>\n";
  // theta_s along x, theta_i along y (bottom = 0).
  for (std::size_t a = 0; a < ti.size(); ++a) {
    for (std::size_t b = 0; b < ts.size(); ++b) {
      const auto it = cells.find({ti[a], ts[b]});
      if (it == cells.end()) continue;
      const double f = hi > lo ? (it->second - lo) / (hi - lo) : 0.5;
      const int red = static_cast<int>(std::lround(255 * f));
      const int blue = 255 - red;
      const int green = static_cast<int>(std::lround(255 * (1.0 - std::abs(2 * f - 1.0)) * 0.6));
      svg << "<rect x=\"" << margin + static_cast<int>(b) * cell << "\" y=\""
          << margin + h - (static_cast<int>(a) + 1) * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ',' << green << ',' << blue
          << ")\"/>\n";
    }
  }
  svg << "<text x=\"" << margin << "\" y=\"" << h + margin + 20
      << "\" font-size=\"12\">theta_s (deg) &#8594;</text>\n";
  svg << "<text x=\"10\" y=\"" << margin + h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 10,"
      << margin + h / 2 << ")\">theta_i (deg)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qfi::bounds
