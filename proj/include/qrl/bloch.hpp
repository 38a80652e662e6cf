#pragma once

// Closed-form single-qubit evolution and overlap angles. Used as an
// independent check on the generic matrix pathway.

#include "qrl/environment.hpp"
#include "qrl/linalg.hpp"

namespace qrl {

/// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
struct BlochAngles {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2 pi)
};

/// <probe|evolved> decomposed as
///   evolved ~ cos(dtheta/2)|probe> + e^{i dphi} sin(dtheta/2)|probe_perp>
/// with |probe_perp> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>.
struct OverlapAngles {
  double delta_theta = 0.0;
  double delta_phi = 0.0;
  double psi0 = 0.0;  // phase of the |probe> amplitude
  double psi1 = 0.0;  // phase of the |probe_perp> amplitude
};

struct BornProbabilities {
  double p0 = 1.0;
  double p1 = 0.0;
};

StateVector bloch_state(const BlochAngles& angles);
/// Companion basis vector orthogonal to bloch_state(angles).
StateVector bloch_state_perp(const BlochAngles& angles);

/// Bloch angles of U_E |in> for the operator built from `spec`, up to global
/// phase. phi is reduced into [0, 2 pi).
BlochAngles evolved_bloch_angles(const SingleQubitSpec& spec, double tau, const BlochAngles& in);

OverlapAngles overlap_angles(const BlochAngles& probe, const BlochAngles& evolved);

BornProbabilities born_probabilities(const OverlapAngles& overlap);

}  // namespace qrl
