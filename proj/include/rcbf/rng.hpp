#pragma once

// Deterministic random number generation.  The engine is std::mt19937_64,
// whose output sequence is fixed by the standard; the distribution transforms
// are implemented here explicitly (std::normal_distribution and friends are
// not bit-reproducible across standard libraries).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace rcbf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached, so a single
  // stream yields a fixed sequence regardless of call grouping.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal with unit variance per entry
  // (variance 1/2 per real component).
  std::complex<double> cnormal() {
    const double s = std::sqrt(0.5);
    double re = normal(), im = normal();
    return {s * re, s * im};
  }

  Eigen::VectorXcd cnormal_vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

  // Uniform draw from the closed unit ball of C^n (2n real dimensions):
  // isotropic direction times radius U^(1/(2n)).
  Eigen::VectorXcd uniform_ball(Eigen::Index n) {
    if (n <= 0) throw std::invalid_argument("uniform_ball: dimension must be positive");
    Eigen::VectorXcd g = cnormal_vector(n);
    double norm = g.norm();
    while (norm == 0.0) {  // probability-zero guard
      g = cnormal_vector(n);
      norm = g.norm();
    }
    double r = std::pow(uniform(), 1.0 / (2.0 * static_cast<double>(n)));
    return (r / norm) * g;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rcbf
