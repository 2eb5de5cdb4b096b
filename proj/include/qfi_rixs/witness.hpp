#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfi_rixs/rixssim.hpp"

namespace qfi::witness {

using rixssim::Spectrum;

/// Reads a spectrum CSV and, when present, its JSON sidecar. Sampled
/// spectra need strictly ascending omega, pole lists non-decreasing omega.
/// Negative intensities are clipped to zero and counted in `clipped`.
/// Throws DataError naming the offending line.
Spectrum load_measured_spectrum(const std::filesystem::path& path);
Spectrum parse_spectrum_csv(std::istream& in, const std::string& source);

/// 2 gamma^2 (int_{omega>0} fwd + int_{omega>0} rev).
double measured_qfi(const Spectrum& fwd, const Spectrum& rev, double gamma);

/// 4 gamma^2 int_{omega>0} I^mp.
double mixed_integral(const Spectrum& mixed, double gamma);

/// Trapezoid on the full grid versus every other sample.
struct RefinementCheck {
  double full = 0.0;
  double half = 0.0;
  bool flagged = false;  // relative change above 1%
};
std::optional<RefinementCheck> refinement_check(const Spectrum& spec);

enum class WitnessChannel { polarization_resolved, mixed };

struct Provenance {
  std::vector<std::string> files;
  double gamma = 0.0;
  std::string geometry;
  std::string units = "f0 (radial integral 1)";
};

struct WitnessReport {
  double f_q_value = 0.0;
  std::map<int, double> bounds_by_k;
  int certified_depth = 1;
  WitnessChannel channel = WitnessChannel::polarization_resolved;
  Provenance inputs;
  std::optional<double> offset_term;
  std::vector<std::string> notes;
};

/// Depth = 1 + largest k with bound(k) < f_q, capped at n_sites; 1 if none.
/// Excesses below 1e-9 of the largest bound count as round-off.
WitnessReport certify(double f_q, const std::function<double(int)>& bound_fn, int n_sites);

/// Same threshold logic against the mixed-polarization totals.
WitnessReport certify_mixed(double integral_value, const std::function<double(int)>& mixed_bound_fn,
                            int n_sites);

/// Versioned JSON (`"format": 1`).
std::string report_json(const WitnessReport& report);
std::string report_text(const WitnessReport& report);

}  // namespace qfi::witness
