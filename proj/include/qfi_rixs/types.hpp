#pragma once

#include <complex>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfi {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Error categories map one-to-one onto CLI exit codes (see tools/qfi_rixs.cpp).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Largest |h_ij - conj(h_ji)|.
inline double max_asymmetry(const CMatrix& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

// Shortest text that parses back to the same double; used for all CSV/JSON
// numbers so repeated runs are byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace qfi
