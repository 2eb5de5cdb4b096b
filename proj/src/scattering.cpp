#include "qfi_rixs/scattering.hpp"

#include <cmath>
#include <string>

namespace qfi::scattering {

TMatrix t_matrix(const angular::DipoleMatrix& m_i, const angular::DipoleMatrix& m_s) {
  if (m_i.entries.rows() != m_s.entries.rows() || m_i.entries.cols() != m_s.entries.cols()) {
    throw DomainError("dipole matrices for eps_i and eps_s do not share a basis");
  }
  return {m_s.entries.adjoint() * m_i.entries, m_i.polarization, m_s.polarization};
}

TMatrix conjugate_t(const TMatrix& t) { return {t.entries.adjoint(), t.eps_s, t.eps_i}; }

double optimal_phase(cplx t_sq_expectation) {
  if (std::abs(t_sq_expectation) < 1e-12) return kPi / 4;
  double phase = kPi / 4 - 0.5 * std::arg(t_sq_expectation);
  phase = std::fmod(phase, kPi);
  if (phase < 0) phase += kPi;
  return phase;
}

LocalGeneratorMatrix local_generator(const TMatrix& t, double q_chain, double r_j, double phase,
                                     int site_index) {
  const cplx u = std::polar(1.0, q_chain * r_j + phase);
  CMatrix h = u * t.entries + std::conj(u) * t.entries.adjoint();
  // Exact Hermiticity; the two halves are conjugates of each other already.
  h = 0.5 * (h + h.adjoint()).eval();
  return {h, site_index};
}

double eigenvalue_spread(const CMatrix& h) {
  if (h.rows() != h.cols()) throw DomainError("eigenvalue_spread needs a square matrix");
  if (h.size() == 0) return 0.0;
  const double asym = max_asymmetry(h);
  if (asym > 1e-10) {
    throw DomainError("matrix is not Hermitian, max |h - h^dagger| = " + std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(0.0, ev[ev.size() - 1] - ev[0]);
}

CMatrix HermitianGenerator::assemble() const {
  const auto d = t.entries.rows();
  const auto n = static_cast<int>(site_positions.size());
  Eigen::Index total = 1;
  for (int j = 0; j < n; ++j) total *= d;
  CMatrix tq = CMatrix::Zero(total, total);
  for (int j = 0; j < n; ++j) {
    Eigen::Index left = 1;
    for (int s = 0; s < j; ++s) left *= d;
    const Eigen::Index right = total / (left * d);
    const cplx ph = std::polar(1.0, q_chain * site_positions[static_cast<std::size_t>(j)]);
    for (Eigen::Index l = 0; l < left; ++l) {
      for (Eigen::Index r = 0; r < right; ++r) {
        for (Eigen::Index a = 0; a < d; ++a) {
          for (Eigen::Index b = 0; b < d; ++b) {
            tq((l * d + a) * right + r, (l * d + b) * right + r) += ph * t.entries(a, b);
          }
        }
      }
    }
  }
  const cplx u = std::polar(1.0, phase);
  return (u * tq + std::conj(u) * tq.adjoint()) / std::sqrt(2.0);
}

}  // namespace qfi::scattering
