#include "qfi_rixs/witness.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace qfi::witness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw DataError(where + ": cannot parse \"" + t + "\" as a number");
  if (!std::isfinite(v)) throw DataError(where + ": non-finite value");
  return v;
}

}  // namespace

Spectrum parse_spectrum_csv(std::istream& in, const std::string& source) {
  Spectrum s;
  s.kind = rixssim::SpectrumKind::sampled;
  s.has_meta = false;
  bool header_seen = false;
  std::string line;
  int line_no = 0;
  double last = 0.0;
  bool have_last = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (t[0] == '#') {
      if (trim(t.substr(1)) == "poles") s.kind = rixssim::SpectrumKind::poles;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (t == "omega,weight") {
        s.kind = rixssim::SpectrumKind::poles;
        continue;
      }
      if (t == "omega,intensity") {
        if (s.kind == rixssim::SpectrumKind::poles) {
          throw DataError(where + ": pole files need the header omega,weight");
        }
        continue;
      }
      throw DataError(where + ": expected header omega,intensity or omega,weight");
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw DataError(where + ": expected two comma-separated columns");
    }
    const double omega = parse_number(t.substr(0, comma), where);
    double value = parse_number(t.substr(comma + 1), where);
    const bool poles = s.kind == rixssim::SpectrumKind::poles;
    if (have_last && (poles ? omega < last : omega <= last)) {
      throw DataError(where + ": omega must be ascending (" + format_double(omega) + " after " +
                      format_double(last) + ")");
    }
    last = omega;
    have_last = true;
    if (value < 0.0) {
      ++s.clipped;
      value = 0.0;
    }
    if (poles) {
      s.poles.push_back({omega, value});
    } else {
      s.samples.push_back({omega, value});
    }
  }
  if (!header_seen) throw DataError(source + ": empty spectrum file");
  if (s.poles.empty() && s.samples.empty()) throw DataError(source + ": no data rows");
  if (s.clipped > 0) {
    std::cerr << "warning: " << source << ": clipped " << s.clipped
              << " negative intensities to zero\n";
  }
  return s;
}

Spectrum load_measured_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spectrum " + path.string());
  Spectrum s = parse_spectrum_csv(in, path.string());
  const auto meta_path = rixssim::sidecar_path(path);
  if (std::filesystem::exists(meta_path) && meta_path != path) {
    std::ifstream mi(meta_path);
    try {
      const auto j = nlohmann::json::parse(mi);
      s.meta.q_chain = j.at("q_chain").get<double>();
      s.meta.eps_i = j.at("eps_i").get<std::string>();
      s.meta.eps_s = j.at("eps_s").get<std::string>();
      s.meta.omega_in = j.at("omega_in").get<double>();
      s.meta.gamma = j.at("gamma").get<double>();
      s.omega_cut = j.value("omega_cut", 0.0);
      s.has_meta = true;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(meta_path.string() + ": bad spectrum metadata: " + e.what());
    }
  }
  return s;
}

double measured_qfi(const Spectrum& fwd, const Spectrum& rev, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return rixssim::qfi_from_spectra(fwd, rev, gamma);
}

double mixed_integral(const Spectrum& mixed, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (mixed.has_meta && mixed.meta.gamma > 0.0 &&
      std::abs(mixed.meta.gamma - gamma) > 1e-12 * std::max(1.0, gamma)) {
    throw DomainError("gamma mismatch: spectrum metadata has " + format_double(mixed.meta.gamma));
  }
  return 4.0 * gamma * gamma * mixed.stokes_weight();
}

std::optional<RefinementCheck> refinement_check(const Spectrum& spec) {
  if (spec.kind != rixssim::SpectrumKind::sampled || spec.samples.size() < 5) return std::nullopt;
  Spectrum half = spec;
  half.samples.clear();
  for (std::size_t i = 0; i < spec.samples.size(); i += 2) half.samples.push_back(spec.samples[i]);
  if (half.samples.back().omega != spec.samples.back().omega) half.samples.push_back(spec.samples.back());
  RefinementCheck r{spec.stokes_weight(), half.stokes_weight(), false};
  r.flagged = std::abs(r.full - r.half) > 0.01 * std::abs(r.full);
  return r;
}

namespace {

WitnessReport scan(double value, const std::function<double(int)>& bound_fn, int n_sites,
                   WitnessChannel channel) {
  if (n_sites < 1) throw DomainError("certification needs n_sites >= 1");
  WitnessReport r;
  r.f_q_value = value;
  r.channel = channel;
  double scale = 0.0;
  for (int k = 1; k <= n_sites; ++k) {
    r.bounds_by_k[k] = bound_fn(k);
    scale = std::max(scale, r.bounds_by_k[k]);
  }
  // Excess below 1e-9 of the largest bound is treated as round-off. With every
  // bound zero the generator is trivial and nothing can be certified.
  int violated = 0;
  if (scale > 0.0) {
    for (const auto& [k, b] : r.bounds_by_k) {
      if (value > b + 1e-9 * scale) violated = k;
    }
  } else {
    r.notes.push_back("all bounds vanish: the generator is trivial for this geometry");
  }
  r.certified_depth = std::min(n_sites, violated + 1);
  return r;
}

}  // namespace

WitnessReport certify(double f_q, const std::function<double(int)>& bound_fn, int n_sites) {
  return scan(f_q, bound_fn, n_sites, WitnessChannel::polarization_resolved);
}

WitnessReport certify_mixed(double integral_value, const std::function<double(int)>& mixed_bound_fn,
                            int n_sites) {
  return scan(integral_value, mixed_bound_fn, n_sites, WitnessChannel::mixed);
}

std::string report_json(const WitnessReport& report) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["channel"] = report.channel == WitnessChannel::mixed ? "mixed" : "polarization_resolved";
  j["f_q_value"] = report.f_q_value;
  j["certified_depth"] = report.certified_depth;
  nlohmann::ordered_json b = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.bounds_by_k) b[std::to_string(k)] = v;
  j["bounds_by_k"] = b;
  if (report.offset_term) j["offset_term"] = *report.offset_term;
  j["inputs"] = {{"files", report.inputs.files},
                 {"gamma", report.inputs.gamma},
                 {"geometry", report.inputs.geometry},
                 {"units", report.inputs.units}};
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

std::string report_text(const WitnessReport& report) {
  std::ostringstream out;
  const bool mixed = report.channel == WitnessChannel::mixed;
  out << (mixed ? "mixed-polarization integral 4 G^2 int I_mp" : "QFI 2 G^2 int (I_fwd + I_rev)")
      << " = " << format_double(report.f_q_value) << " [" << report.inputs.units << "]\n";
  out << "gamma = " << format_double(report.inputs.gamma) << "\n";
  if (!report.inputs.geometry.empty()) out << "geometry: " << report.inputs.geometry << "\n";
  if (report.offset_term) out << "commutator offset = " << format_double(*report.offset_term) << "\n";
  for (const auto& [k, v] : report.bounds_by_k) {
    out << "  k = " << k << ": bound " << format_double(v)
        << (report.f_q_value > v ? "  VIOLATED" : "") << "\n";
  }
  if (report.certified_depth > 1) {
    out << "certified entanglement depth: at least " << report.certified_depth << "-partite\n";
  } else {
    out << "no multipartite entanglement witnessed\n";
  }
  for (const auto& n : report.notes) out << "note: " << n << "\n";
  return out.str();
}

}  // namespace qfi::witness
