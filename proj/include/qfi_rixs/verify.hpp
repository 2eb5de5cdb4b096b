#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qfi_rixs/geometry.hpp"
#include "qfi_rixs/rixssim.hpp"

namespace qfi::verify {

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
  int bound_samples = 600;
  int identity_trials = 6;
  int mixed_trials = 200;
  /// Test fixture: flips the sign of the Arg term in the optimal phase.
  bool phase_sign_fault = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed figure of merit
  double threshold = 0.0;  // pass limit for `value`
  std::string detail;
};

struct VerifySummary {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Property and oracle suite over seeded random inputs. Results do not depend
/// on the thread count.
VerifySummary run_verification(const VerifyOptions& options);
std::string summary_json(const VerifySummary& summary);

// Shared generators for seeded experiments.

/// Uniform random angles and channel; real polarizations.
geometry::BeamGeometry random_geometry(std::mt19937_64& rng);
/// Uniform on the complex unit sphere in C^3.
geometry::PolarizationVector random_polarization(std::mt19937_64& rng);

/// Random periodic-ring model whose valence ground state is non-degenerate.
rixssim::ClusterModel random_ring_model(int n_sites, int n_orb, std::mt19937_64& rng);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qfi::verify
