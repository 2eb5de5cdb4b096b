#include "qfi_rixs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "qfi_rixs/angular.hpp"
#include "qfi_rixs/bounds.hpp"
#include "qfi_rixs/manybody.hpp"
#include "qfi_rixs/parallel.hpp"
#include "qfi_rixs/scattering.hpp"

namespace qfi::verify {

namespace {

using angular::HalfInt;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Splits a seed stream so every sample owns an independent generator.
std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

CheckResult cg_orthonormality() {
  double worst = 0.0;
  for (int tj1 = 0; tj1 <= 5; ++tj1) {
    for (int tj2 = 0; tj2 <= 5; ++tj2) {
      const HalfInt j1{tj1};
      const HalfInt j2{tj2};
      for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
        for (int tJp = std::abs(tj1 - tj2); tJp <= tj1 + tj2; tJp += 2) {
          for (int tM = -tJ; tM <= tJ; tM += 2) {
            for (int tMp = -tJp; tMp <= tJp; tMp += 2) {
              double s = 0.0;
              for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
                for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2) {
                  s += angular::clebsch_gordan(j1, {tm1}, j2, {tm2}, {tJ}, {tM}) *
                       angular::clebsch_gordan(j1, {tm1}, j2, {tm2}, {tJp}, {tMp});
                }
              }
              const double expect = (tJ == tJp && tM == tMp) ? 1.0 : 0.0;
              worst = std::max(worst, std::abs(s - expect));
            }
          }
        }
      }
    }
  }
  return {"cg-orthonormality", worst < 1e-12, worst, 1e-12, "j1, j2 <= 5/2"};
}

CheckResult adjoint_identity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto basis = angular::OrbitalBasis::l_edge_3d();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto mi = angular::dipole_matrix(random_polarization(rng), basis);
    const auto ms = angular::dipole_matrix(random_polarization(rng), basis);
    const auto t = scattering::t_matrix(mi, ms);
    const auto r = scattering::t_matrix(ms, mi);
    worst = std::max(worst, (r.entries - t.entries.adjoint()).cwiseAbs().maxCoeff());
  }
  return {"adjoint-identity", worst < 1e-14, worst, 1e-14, "50 random polarization pairs"};
}

struct BoundSample {
  double violation = 0.0;  // F_Q / bound - 1
  double phase_residual = 0.0;
};

std::vector<BoundSample> bound_samples(const VerifyOptions& opt) {
  const auto basis = angular::OrbitalBasis::l_edge_3d();
  const bounds::DipoleSource source = bounds::DipoleSource::atomic(basis);
  std::vector<BoundSample> out(static_cast<std::size_t>(opt.bound_samples));
  parallel_for(out.size(), opt.threads, [&](std::size_t i) {
    std::mt19937_64 rng(mix(opt.seed, 1000 + i));
    const int n = 2 + static_cast<int>(i % 2);  // N = 2, 3 with the full 3d shell
    const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const auto geom = random_geometry(rng);
    const auto channel = bounds::kResolvedChannels[rng() % 4];
    const auto t = bounds::channel_t_matrix(source, geom, channel);
    const double q = geometry::momentum_transfer(geom, Vec3::UnitX()).q_chain;
    const auto lattice = manybody::LatticeSpec::chain(n, 5);
    const auto part = manybody::random_partition(n, k, rng());
    const auto state = manybody::random_k_producible_state(lattice, part, rng());
    const cplx t_sq = manybody::t_sq_expectation(state, t, q);
    double phase = scattering::optimal_phase(t_sq);
    if (opt.phase_sign_fault) phase = scattering::optimal_phase(std::conj(t_sq));
    const double fq = manybody::qfi_pure(state, t, q, phase);
    const double bound = bounds::k_producible_bound(t, q, lattice.site_positions, phase, k).value;
    out[i].violation = bound > 0.0 ? fq / bound - 1.0 : (fq > 0.0 ? 1.0 : -1.0);
    out[i].phase_residual = std::abs((std::polar(1.0, 2.0 * phase) * t_sq).real());
  });
  return out;
}

struct ClusterRun {
  double identity_error = 0.0;
  double mixed_margin = 0.0;  // max over trials of (integral - bound) / bound
  double offset_error = 0.0;
};

double phase_for(const VerifyOptions& opt, cplx t_sq) {
  return scattering::optimal_phase(opt.phase_sign_fault ? std::conj(t_sq) : t_sq);
}

ClusterRun cluster_run(const VerifyOptions& opt, std::size_t index, int mixed_trials) {
  std::mt19937_64 rng(mix(opt.seed, 5000 + index));
  const int n = 3;
  const auto model = random_ring_model(n, 2, rng);
  const auto dec = rixssim::decompose(model);
  const auto& lat = model.lattice();
  const double q = 2.0 * kPi * static_cast<double>(1 + rng() % 2) / n;
  const auto geom = random_geometry(rng);
  const double gamma = 1e12 * std::max(1.0, dec.valence.bandwidth());
  const auto ground = manybody::ManyBodyState(dec.valence.ground_state(), lat);

  ClusterRun run;
  std::array<scattering::TMatrix, 4> ts;
  std::array<double, 4> phases{};
  std::array<rixssim::Spectrum, 4> ucl_specs;
  for (std::size_t c = 0; c < 4; ++c) {
    const auto [li, ls] = bounds::channel_labels(bounds::kResolvedChannels[c]);
    const auto ei = geometry::polarization_vector(geom, geometry::Beam::incident, li);
    const auto es = geometry::polarization_vector(geom, geometry::Beam::scattered, ls);
    const auto mi = model.dipole(ei);
    const auto ms = model.dipole(es);
    ts[c] = scattering::t_matrix(mi, ms);
    phases[c] = phase_for(opt, manybody::t_sq_expectation(ground, ts[c], q));

    const std::string name_i = li == geometry::PolLabel::pi ? "pi" : "sigma";
    const std::string name_s = ls == geometry::PolLabel::pi ? "pi" : "sigma";
    const double w_in = model.params().E_edge;
    const auto fwd = rixssim::spectrum(rixssim::final_state(model, dec, mi, ms, q, w_in, gamma),
                                       dec.valence, {q, name_i, name_s, w_in, gamma});
    const auto rev = rixssim::spectrum(rixssim::final_state(model, dec, ms, mi, -q, w_in, gamma),
                                       dec.valence, {-q, name_s, name_i, w_in, gamma});
    const double from_spectra = rixssim::qfi_from_spectra(fwd, rev, gamma);
    const double oracle = manybody::qfi_pure(ground, ts[c], q, phases[c]);
    run.identity_error = std::max(run.identity_error, relative(from_spectra, oracle));

    const double g_ucl = 1.0;
    ucl_specs[c] = rixssim::spectrum(rixssim::ucl_final_state(model, dec, mi, ms, q, g_ucl),
                                     dec.valence, {q, name_i, name_s, w_in, g_ucl});
  }

  const double offset = bounds::commutator_offset(ts, n);
  double lmax = 0.0;
  for (const auto& t : ts) {
    const CMatrix c = t.entries.adjoint() * t.entries - t.entries * t.entries.adjoint();
    Eigen::ComplexEigenSolver<CMatrix> es(c);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) lmax = std::max(lmax, es.eigenvalues()[i].real());
  }
  run.offset_error = std::abs(offset - 2.0 * n * lmax);

  const auto bound = bounds::mixed_pol_bound(ts, q, lat.site_positions, phases, n).total;
  run.mixed_margin = -1.0;
  for (int trial = 0; trial < mixed_trials; ++trial) {
    std::array<double, 4> w{};
    double sum = 0.0;
    for (double& x : w) sum += (x = -std::log(uniform(rng, 1e-300, 1.0)));
    for (double& x : w) x /= sum;
    const auto mixed = rixssim::mixed_spectrum(ucl_specs, w);
    const double integral = 4.0 * mixed.stokes_weight();
    run.mixed_margin = std::max(run.mixed_margin, (integral - bound) / bound);
  }
  return run;
}

CheckResult ucl_convergence(std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, 9000));
  const auto model = random_ring_model(2, 2, rng);
  const auto dec = rixssim::decompose(model);
  const double q = kPi;
  const double bw = dec.valence.bandwidth();
  // Redraw until T_q |G> is nonzero; some orbital subsets are dark in a given channel.
  angular::DipoleMatrix mi, ms;
  CVector target;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto geom = random_geometry(rng);
    const auto li = attempt % 2 ? geometry::PolLabel::sigma : geometry::PolLabel::pi;
    mi = model.dipole(geometry::polarization_vector(geom, geometry::Beam::incident, li));
    ms = model.dipole(geometry::polarization_vector(geom, geometry::Beam::scattered, geometry::PolLabel::sigma));
    target = rixssim::ucl_final_state(model, dec, mi, ms, q, 1.0);
    if (target.norm() > 1e-8) break;
  }
  std::vector<double> gammas;
  std::vector<double> devs;
  for (double f : {1e1, 1e2, 1e3, 1e4}) {
    const double g = f * bw;
    const CVector psi = rixssim::final_state(model, dec, mi, ms, q, model.params().E_edge, g);
    gammas.push_back(g);
    devs.push_back((g * psi - target).norm() / target.norm());
  }
  const double slope = loglog_slope(gammas, devs);
  return {"ucl-convergence", std::abs(slope + 1.0) <= 0.1, slope, -1.0,
          "log-log slope of |G psi_f - i T_q G| / |T_q G|, expected -1 +- 0.1"};
}

}  // namespace

bool VerifySummary::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

geometry::BeamGeometry random_geometry(std::mt19937_64& rng) {
  return geometry::BeamGeometry::from_radians(uniform(rng, 0.0, kPi / 2), uniform(rng, 0.0, kPi / 2),
                                              uniform(rng, 0.0, 2 * kPi));
}

geometry::PolarizationVector random_polarization(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec3 v;
  for (int i = 0; i < 3; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[i] = {re, im};
  }
  return geometry::PolarizationVector::normalized(v);
}

rixssim::ClusterModel random_ring_model(int n_sites, int n_orb, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    rixssim::ClusterParams p;
    p.J_s = uniform(rng, 0.5, 1.5);
    p.J_so = uniform(rng, -0.5, 0.5);
    p.delta_cf.resize(static_cast<std::size_t>(n_orb));
    for (double& d : p.delta_cf) d = uniform(rng, 0.0, 1.0);
    p.field = Vec3(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), uniform(rng, 0.1, 0.4));
    p.E_edge = uniform(rng, 2.0, 4.0);
    p.xi_c = uniform(rng, 0.2, 0.8);
    p.U_c = uniform(rng, 0.0, 1.0);
    p.gamma = 0.5;
    p.periodic = true;
    rixssim::ClusterModel model(manybody::LatticeSpec::chain(n_sites, n_orb), p);
    const auto ev = rixssim::diagonalize(model, std::nullopt).eigenvalues;
    if (ev[1] - ev[0] > 1e-3 * (ev[ev.size() - 1] - ev[0])) return model;
  }
  throw std::runtime_error("could not draw a cluster model with a unique ground state");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

VerifySummary run_verification(const VerifyOptions& opt) {
  VerifySummary s;
  s.seed = opt.seed;
  s.checks.push_back(cg_orthonormality());
  s.checks.push_back(adjoint_identity(mix(opt.seed, 1)));

  const auto samples = bound_samples(opt);
  double worst_violation = -1.0;
  double worst_phase = 0.0;
  for (const auto& b : samples) {
    worst_violation = std::max(worst_violation, b.violation);
    worst_phase = std::max(worst_phase, b.phase_residual);
  }
  s.checks.push_back({"phase-nullification", worst_phase < 1e-12, worst_phase, 1e-12,
                      std::to_string(samples.size()) + " random k-producible states"});
  s.checks.push_back({"bound-non-violation", worst_violation <= 1e-9, worst_violation, 1e-9,
                      "max F_Q / bound - 1 over " + std::to_string(samples.size()) + " states"});

  std::vector<ClusterRun> runs(static_cast<std::size_t>(opt.identity_trials));
  const int per_run = std::max(1, opt.mixed_trials / std::max(1, opt.identity_trials));
  parallel_for(runs.size(), opt.threads, [&](std::size_t i) { runs[i] = cluster_run(opt, i, per_run); });
  double id_err = 0.0;
  double margin = -1.0;
  double off_err = 0.0;
  for (const auto& r : runs) {
    id_err = std::max(id_err, r.identity_error);
    margin = std::max(margin, r.mixed_margin);
    off_err = std::max(off_err, r.offset_error);
  }
  s.checks.push_back({"qfi-spectral-identity", id_err <= 1e-8, id_err, 1e-8,
                      "relative error of 2 G^2 int(I_fwd + I_rev) vs 4 Var(O_q), N=3 rings"});
  s.checks.push_back({"mixed-bound-soundness", margin <= 0.0, margin, 0.0,
                      "max (4 G^2 int I_mp - bound) / bound over random weights, k = N"});
  s.checks.push_back({"commutator-offset", off_err <= 1e-10, off_err, 1e-10,
                      "offset vs 2 N lambda_max from a general eigensolver"});
  s.checks.push_back(ucl_convergence(opt.seed));
  return s;
}

std::string summary_json(const VerifySummary& summary) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["seed"] = summary.seed;
  j["passed"] = summary.passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : summary.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["value"] = format_double(c.value);
    e["threshold"] = format_double(c.threshold);
    e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  return j.dump(2) + "\n";
}

}  // namespace qfi::verify
