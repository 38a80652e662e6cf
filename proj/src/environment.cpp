#include "qrl/environment.hpp"

#include <cmath>
#include <numbers>

#include "qrl/error.hpp"
#include "qrl/rng.hpp"

namespace qrl {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(std::size_t dim) {
  if (dim < 2 || dim > kMaxDim) {
    throw Error(Errc::BadDim, "dim must be in [2, " + std::to_string(kMaxDim) + "], got " +
                                  std::to_string(dim));
  }
}

void add_projector(ComplexMatrix& m, double weight, const std::vector<Complex>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) += weight * v[i] * std::conj(v[j]);
}

// Copies the upper triangle onto the lower one so the result is Hermitian bit-exactly.
ComplexMatrix exact_hermitian(ComplexMatrix m) {
  for (std::size_t i = 0; i < m.dim(); ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < m.dim(); ++j) m(j, i) = std::conj(m(i, j));
  }
  return m;
}

}  // namespace

std::string_view to_string(EnvOrigin origin) noexcept {
  switch (origin) {
    case EnvOrigin::Random: return "random";
    case EnvOrigin::SingleQubitSpec: return "single-qubit-spec";
    case EnvOrigin::SpinX: return "spin-x";
    case EnvOrigin::Bell: return "bell";
    case EnvOrigin::Explicit: return "explicit";
  }
  return "unknown";
}

Environment::Environment(ComplexMatrix o_e, double tau, EnvOrigin origin)
    : o_e_(std::move(o_e)), tau_(tau), u_e_(unitary_from_hermitian(o_e_, tau)), origin_(origin) {}

StateVector Environment::interact(const StateVector& psi) const { return apply_unitary(u_e_, psi); }

Interaction Environment::interaction() const {
  return Interaction(dim(), [u = u_e_](const StateVector& psi) { return apply_unitary(u, psi); });
}

Environment env_random(std::size_t dim, double tau, std::uint64_t seed) {
  require_dim(dim);
  Rng rng(seed);
  ComplexMatrix g(dim);
  const double sigma = std::sqrt(0.5);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const double re = sigma * standard_normal(rng);
      const double im = sigma * standard_normal(rng);
      g(i, j) = Complex(re, im);
    }
  ComplexMatrix h = exact_hermitian(0.5 * (g + g.adjoint()));
  const Eigensystem es = eig_hermitian(h);
  const double range = es.eigenvalues.back() - es.eigenvalues.front();
  if (!(range > 0.0)) throw Error(Errc::BadDim, "degenerate random draw");
  h = exact_hermitian((2.0 / range) * h);
  return Environment(std::move(h), tau, EnvOrigin::Random);
}

Environment env_single_qubit(const SingleQubitSpec& spec, double tau) {
  if (!(spec.alpha >= 0.0 && spec.alpha <= 2 * kPi)) {
    throw Error(Errc::OutOfRange, "alpha must be in [0, 2pi]");
  }
  if (!(spec.beta >= 0.0 && spec.beta <= kPi)) {
    throw Error(Errc::OutOfRange, "beta must be in [0, pi]");
  }
  if (!std::isfinite(spec.lambda0) || !std::isfinite(spec.lambda1)) {
    throw Error(Errc::OutOfRange, "eigenvalues must be finite");
  }
  const double c = std::cos(spec.alpha / 2);
  const double s = std::sin(spec.alpha / 2);
  const Complex eib = std::polar(1.0, spec.beta);
  ComplexMatrix o(2);
  add_projector(o, spec.lambda0, {c, eib * s});
  add_projector(o, spec.lambda1, {s, -eib * c});
  return Environment(exact_hermitian(std::move(o)), tau, EnvOrigin::SingleQubitSpec);
}

Environment env_spin_x(double tau) {
  ComplexMatrix o(2);
  o(0, 1) = 0.5;
  o(1, 0) = 0.5;
  return Environment(std::move(o), tau, EnvOrigin::SpinX);
}

Environment env_bell(double tau) {
  const double h = std::sqrt(0.5);
  ComplexMatrix o(4);
  add_projector(o, 1.0, {h, 0, 0, h});    // phi+
  add_projector(o, -1.0, {h, 0, 0, -h});  // phi-
  add_projector(o, 2.0, {0, h, h, 0});    // psi+
  add_projector(o, -2.0, {0, h, -h, 0});  // psi-
  return Environment(exact_hermitian(std::move(o)), tau, EnvOrigin::Bell);
}

Environment env_explicit(const ComplexMatrix& o_e, double tau) {
  require_dim(o_e.dim());
  if (hermiticity_defect(o_e) > 1e-10) {
    throw Error(Errc::NotHermitian, "operator is not Hermitian");
  }
  return Environment(o_e, tau, EnvOrigin::Explicit);
}

StateVector env_interact(const Environment& env, const StateVector& psi) {
  return env.interact(psi);
}

Eigensystem env_eigensystem_oracle(const Environment& env) {
  return eig_hermitian(env_operator_oracle(env));
}

const ComplexMatrix& env_operator_oracle(const Environment& env) { return env.o_e_; }

const ComplexMatrix& env_unitary_oracle(const Environment& env) { return env.u_e_; }

}  // namespace qrl
