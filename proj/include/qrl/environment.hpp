#pragma once

// The black box E. It owns the hidden Hermitian operator O_E and the
// interaction time tau and exposes only the unitary action
// U_E = exp(-i tau O_E). The operator and its eigensystem are reachable
// through the oracle functions below, which are for the harness and tests.

#include <cstdint>
#include <string_view>

#include "qrl/interaction.hpp"
#include "qrl/linalg.hpp"

namespace qrl {

enum class EnvOrigin { Random, SingleQubitSpec, SpinX, Bell, Explicit };

std::string_view to_string(EnvOrigin origin) noexcept;

/// Eigenbasis |v0> = cos(a/2)|0> + e^{ib} sin(a/2)|1>,
///            |v1> = sin(a/2)|0> - e^{ib} cos(a/2)|1>, with eigenvalues lambda0, lambda1.
struct SingleQubitSpec {
  double alpha = 0.0;  // [0, 2 pi]
  double beta = 0.0;   // [0, pi]
  double lambda0 = -1.0;
  double lambda1 = 1.0;
};

class Environment {
 public:
  std::size_t dim() const noexcept { return o_e_.dim(); }
  double tau() const noexcept { return tau_; }
  EnvOrigin origin() const noexcept { return origin_; }

  /// U_E |psi>
  StateVector interact(const StateVector& psi) const;

  /// Capability handed to the agent; holds a copy of U_E only.
  Interaction interaction() const;

  friend Environment env_random(std::size_t dim, double tau, std::uint64_t seed);
  friend Environment env_single_qubit(const SingleQubitSpec& spec, double tau);
  friend Environment env_spin_x(double tau);
  friend Environment env_bell(double tau);
  friend Environment env_explicit(const ComplexMatrix& o_e, double tau);
  friend const ComplexMatrix& env_operator_oracle(const Environment& env);
  friend const ComplexMatrix& env_unitary_oracle(const Environment& env);

 private:
  Environment(ComplexMatrix o_e, double tau, EnvOrigin origin);

  ComplexMatrix o_e_;
  double tau_;
  ComplexMatrix u_e_;
  EnvOrigin origin_;
};

/// GUE draw (G + G^dagger)/2, G with independent standard complex Gaussian
/// entries, rescaled so lambda_max - lambda_min = 2. Deterministic per seed.
Environment env_random(std::size_t dim, double tau, std::uint64_t seed);
Environment env_single_qubit(const SingleQubitSpec& spec, double tau);
/// O_E = sigma_x / 2
Environment env_spin_x(double tau);
/// |phi+><phi+| - |phi-><phi-| + 2(|psi+><psi+| - |psi-><psi-|) on two qubits.
Environment env_bell(double tau);
Environment env_explicit(const ComplexMatrix& o_e, double tau);

StateVector env_interact(const Environment& env, const StateVector& psi);

// Oracle gate: not for the agent.
Eigensystem env_eigensystem_oracle(const Environment& env);
const ComplexMatrix& env_operator_oracle(const Environment& env);
const ComplexMatrix& env_unitary_oracle(const Environment& env);
const ComplexMatrix& env_operator_oracle(const Environment&& env) = delete;
const ComplexMatrix& env_unitary_oracle(const Environment&& env) = delete;

}  // namespace qrl
