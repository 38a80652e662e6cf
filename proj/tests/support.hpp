#pragma once

// Test-only helpers: independent oracles and random instance generators.

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>

#include <unistd.h>
#include <random>

#include <doctest.h>

#include "qrl/error.hpp"
#include "qrl/linalg.hpp"

namespace qrl::test {

#define CHECK_THROWS_CODE(expr, errc)                     \
  do {                                                    \
    bool thrown_ = false;                                 \
    try {                                                 \
      (void)(expr);                                       \
    } catch (const ::qrl::Error& e_) {                    \
      thrown_ = true;                                     \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());      \
    }                                                     \
    CHECK_MESSAGE(thrown_, "expected qrl::Error");        \
  } while (0)

/// exp(-i tau H) by scaling and squaring of a truncated Taylor series.
inline ComplexMatrix expm_taylor(const ComplexMatrix& h, double tau) {
  const std::size_t n = h.dim();
  double scale = std::abs(tau) * frobenius_norm(h);
  int squarings = 0;
  while (scale > 0.25) {
    scale /= 2.0;
    ++squarings;
  }
  const ComplexMatrix a = Complex(0.0, -tau / std::ldexp(1.0, squarings)) * h;
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = Complex(1.0 / k, 0.0) * (term * a);
    sum = sum + term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  ComplexMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = g(gen);
    for (std::size_t j = i + 1; j < n; ++j) {
      h(i, j) = Complex(g(gen), g(gen));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

inline ComplexMatrix random_unitary(std::size_t n, std::mt19937_64& gen) {
  return expm_taylor(random_hermitian(n, gen), 1.0);
}

inline StateVector random_state(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  std::vector<Complex> amps(n);
  for (auto& a : amps) a = Complex(g(gen), g(gen));
  return StateVector::normalized(std::move(amps));
}

inline double draw(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

/// Fresh per-process scratch directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("qrl_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ComplexMatrix pauli_x() { return ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0}); }
inline ComplexMatrix pauli_y() {
  return ComplexMatrix(2, {0.0, Complex(0, -1), Complex(0, 1), 0.0});
}
inline ComplexMatrix pauli_z() { return ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0}); }

inline ComplexMatrix diag(std::initializer_list<double> values) {
  ComplexMatrix m(values.size());
  std::size_t i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

}  // namespace qrl::test
