#include "qrl/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qrl/error.hpp"

namespace qrl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClampTol = 1e-12;

double wrap_two_pi(double angle) {
  double out = std::fmod(angle, kTwoPi);
  if (out < 0.0) out += kTwoPi;
  if (out >= kTwoPi) out = 0.0;
  return out;
}

double clamp_unit(double x) {
  if (x > 1.0 + kClampTol || x < -kClampTol) {
    throw Error(Errc::AngleDomain, "squared amplitude " + std::to_string(x) + " outside [0, 1]");
  }
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

StateVector bloch_state(const BlochAngles& a) {
  return StateVector({std::cos(a.theta / 2), std::polar(std::sin(a.theta / 2), a.phi)});
}

StateVector bloch_state_perp(const BlochAngles& a) {
  return StateVector({std::sin(a.theta / 2), -std::polar(std::cos(a.theta / 2), a.phi)});
}

BlochAngles evolved_bloch_angles(const SingleQubitSpec& spec, double tau, const BlochAngles& in) {
  const double lambda = (spec.lambda1 - spec.lambda0) / 2;
  const double ch = std::cos(in.theta / 2);
  const double sh = std::sin(in.theta / 2);
  const double cl = std::cos(lambda * tau);
  const double sl = std::sin(lambda * tau);
  const double ca = std::cos(spec.alpha);
  const double sa = std::sin(spec.alpha);
  const double rel = in.phi - spec.beta;

  // Evolved state up to global phase: (a0 + i b0)|0> + e^{i phi}(a1 + i b1)|1>.
  const double a0 = ch * cl - std::sin(rel) * sh * sa * sl;
  const double b0 = ch * ca * sl + std::cos(rel) * sh * sa * sl;
  const double a1 = sh * cl + std::sin(rel) * ch * sa * sl;
  const double b1 = -sh * ca * sl + std::cos(rel) * ch * sa * sl;

  const double amp0 = std::sqrt(clamp_unit(a0 * a0 + b0 * b0));
  BlochAngles out;
  out.theta = 2.0 * std::acos(amp0);
  out.phi = wrap_two_pi(in.phi + std::atan2(b1, a1) - std::atan2(b0, a0));
  return out;
}

OverlapAngles overlap_angles(const BlochAngles& probe, const BlochAngles& evolved) {
  const double dphi = evolved.phi - probe.phi;
  const double c = std::cos(probe.theta / 2);
  const double s = std::sin(probe.theta / 2);
  const double cb = std::cos(evolved.theta / 2);
  const double sb = std::sin(evolved.theta / 2);

  const double half = (evolved.theta - probe.theta) / 2;
  const double cos2 = clamp_unit(std::cos(half) * std::cos(half) +
                                 0.5 * std::sin(evolved.theta) * std::sin(probe.theta) *
                                     (std::cos(dphi) - 1.0));

  OverlapAngles out;
  out.delta_theta = 2.0 * std::acos(std::sqrt(cos2));
  // Arguments of cb*c + e^{i dphi} sb*s and cb*s - e^{i dphi} sb*c.
  out.psi0 = std::atan2(std::sin(dphi) * sb * s, cb * c + std::cos(dphi) * sb * s);
  out.psi1 = std::atan2(-std::sin(dphi) * sb * c, cb * s - std::cos(dphi) * sb * c);
  out.delta_phi = out.psi1 - out.psi0;
  return out;
}

BornProbabilities born_probabilities(const OverlapAngles& overlap) {
  const double c = std::cos(overlap.delta_theta / 2);
  BornProbabilities out;
  out.p0 = c * c;
  out.p1 = 1.0 - out.p0;
  return out;
}

}  // namespace qrl
