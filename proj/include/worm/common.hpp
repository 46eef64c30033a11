#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace worm {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

// Raised when an iterative or adaptive routine cannot meet its contract
// (step underflow, non-convergent contour quadrature, singular factorization).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed configuration; carries the dotted path of the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Real polynomial c0 + c1 x + c2 x^2 + ...; used for the x-dependent
// coefficients a(x), beta_j(x).
struct Polynomial {
  std::vector<double> c;

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
  double derivative(double x) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * c[k];
    return acc;
  }
  bool is_zero() const {
    for (double v : c)
      if (v != 0.0) return false;
    return true;
  }
  bool is_constant() const {
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] != 0.0) return false;
    return true;
  }
  static Polynomial constant(double v) { return Polynomial{{v}}; }
};

}  // namespace worm
