#include "qrl/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qrl/error.hpp"

namespace qrl {

namespace {

constexpr double kProbabilityTol = 1e-9;

Outcome classify(std::size_t m, std::size_t stage) {
  if (m == stage) return Outcome::Reward;
  return m > stage ? Outcome::Punish : Outcome::Neutral;
}

// Shared tail of decide_and_update and apply_record.
IterationRecord apply_outcome(AgentState& agent, std::size_t m,
                              const std::optional<RotationAngles>& angles) {
  IterationRecord rec;
  rec.k = agent.k;
  rec.stage = agent.stage;
  rec.outcome_m = m;
  rec.classification = classify(m, agent.stage);

  switch (rec.classification) {
    case Outcome::Reward:
      agent.w *= agent.params.r;
      ++agent.n_r;
      break;
    case Outcome::Punish:
      right_multiply_two_level(agent.d_matrix, agent.stage, m, *angles);
      rec.angles = angles;
      agent.w = std::min(agent.w * agent.params.p(), agent.params.w_max);
      if (!std::isfinite(agent.w)) throw Error(Errc::OutOfRange, "search range overflowed");
      ++agent.n_p;
      break;
    case Outcome::Neutral:
      ++agent.n_neutral;
      break;
  }
  rec.w_after = agent.w;

  ++agent.k;
  ++agent.stage_iterations;
  if ((agent.k - 1) % kReorthonormalizeEvery == 0) orthonormalize_columns(agent.d_matrix);
  return rec;
}

}  // namespace

void validate(const RewardParams& params) {
  if (!(params.r > 0.0 && params.r < 1.0)) throw Error(Errc::ConfigError, "r must be in (0, 1)");
  if (!(params.nu >= 1.0) || !std::isfinite(params.nu)) {
    throw Error(Errc::ConfigError, "nu must be a finite value >= 1");
  }
  if (!(params.w1 > 0.0) || !std::isfinite(params.w1)) {
    throw Error(Errc::ConfigError, "w1 must be positive");
  }
  if (!(params.w_max >= params.w1)) throw Error(Errc::ConfigError, "w_max must be >= w1");
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Reward: return "reward";
    case Outcome::Punish: return "punish";
    case Outcome::Neutral: return "neutral";
  }
  return "unknown";
}

std::optional<Outcome> outcome_from_string(std::string_view text) noexcept {
  if (text == "reward") return Outcome::Reward;
  if (text == "punish") return Outcome::Punish;
  if (text == "neutral") return Outcome::Neutral;
  return std::nullopt;
}

void validate(const StoppingRule& rule, std::size_t dim, double w1) {
  if (rule.max_iterations == 0) throw Error(Errc::ConfigError, "max_iterations must be positive");
  if (rule.kind == StoppingRule::Kind::FixedBudget) {
    if (rule.budgets.size() != stage_count(dim)) {
      throw Error(Errc::ConfigError, "fixed budget needs " + std::to_string(stage_count(dim)) +
                                         " stage budgets, got " +
                                         std::to_string(rule.budgets.size()));
    }
    if (std::ranges::any_of(rule.budgets, [](std::uint64_t b) { return b == 0; })) {
      throw Error(Errc::ConfigError, "stage budgets must be positive");
    }
  } else if (!(rule.w_min > 0.0 && rule.w_min < w1)) {
    throw Error(Errc::ConfigError, "w_min must be in (0, w1)");
  }
}

AgentState protocol_init(std::size_t dim, const RewardParams& params, std::uint64_t seed) {
  if (dim < 2 || dim > kMaxDim) {
    throw Error(Errc::BadDim, "agent dim must be in [2, 64], got " + std::to_string(dim));
  }
  validate(params);
  AgentState agent;
  agent.dim = dim;
  agent.params = params;
  agent.d_matrix = ComplexMatrix::identity(dim);
  agent.w = params.w1;
  agent.rng.seed(seed);
  return agent;
}

StateVector prepare_probe(const AgentState& agent) { return column(agent.d_matrix, agent.stage); }

std::vector<double> outcome_probabilities(const AgentState& agent, const StateVector& evolved) {
  if (evolved.dim() != agent.dim) {
    throw Error(Errc::DimMismatch, "evolved state dim " + std::to_string(evolved.dim()) +
                                       " vs agent dim " + std::to_string(agent.dim));
  }
  const ComplexMatrix& d = agent.d_matrix;
  std::vector<double> q(agent.dim);
  double total = 0.0;
  for (std::size_t j = 0; j < agent.dim; ++j) {
    Complex amp{};
    for (std::size_t i = 0; i < agent.dim; ++i) amp += std::conj(d(i, j)) * evolved[i];
    q[j] = std::norm(amp);
    total += q[j];
  }
  if (std::abs(total - 1.0) > kProbabilityTol) {
    throw Error(Errc::OutOfRange, "outcome probabilities sum to " + std::to_string(total));
  }
  return q;
}

std::size_t measure_in_agent_basis(AgentState& agent, const StateVector& evolved) {
  const std::vector<double> q = outcome_probabilities(agent, evolved);
  double total = 0.0;
  for (double x : q) total += x;
  const double u = uniform01(agent.rng) * total;
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] <= 0.0) continue;
    cumulative += q[j];
    last_nonzero = j;
    if (u < cumulative) return j;
  }
  return last_nonzero;
}

IterationRecord decide_and_update(AgentState& agent, std::size_t m) {
  if (m >= agent.dim) {
    throw Error(Errc::OutOfRange, "outcome " + std::to_string(m) + " >= dim " +
                                      std::to_string(agent.dim));
  }
  std::optional<RotationAngles> angles;
  if (m > agent.stage) {
    // Draw order x, z, y over the range in force when the outcome was seen.
    const double half = agent.w * std::numbers::pi;
    RotationAngles a;
    a.phi_x = uniform(agent.rng, -half, half);
    a.phi_z = uniform(agent.rng, -half, half);
    a.phi_y = uniform(agent.rng, -half, half);
    angles = a;
  }
  return apply_outcome(agent, m, angles);
}

IterationRecord apply_record(AgentState& agent, const IterationRecord& record) {
  if (record.stage == agent.stage + 1) advance_stage(agent);
  if (record.k != agent.k || record.stage != agent.stage) {
    throw Error(Errc::TraceError, "record k=" + std::to_string(record.k) + " stage=" +
                                      std::to_string(record.stage) + " does not follow agent k=" +
                                      std::to_string(agent.k) + " stage=" +
                                      std::to_string(agent.stage));
  }
  if (record.outcome_m >= agent.dim) throw Error(Errc::TraceError, "outcome out of range");
  if (record.classification != classify(record.outcome_m, agent.stage)) {
    throw Error(Errc::TraceError, "classification does not match outcome at k=" +
                                      std::to_string(record.k));
  }
  if (record.angles.has_value() != (record.classification == Outcome::Punish)) {
    throw Error(Errc::TraceError, "angles must be present exactly on punishments");
  }
  return apply_outcome(agent, record.outcome_m, record.angles);
}

IterationRecord protocol_step(AgentState& agent, const Interaction& env) {
  if (env.dim() != agent.dim) throw Error(Errc::DimMismatch, "environment and agent dims differ");
  const StateVector probe = prepare_probe(agent);
  const StateVector evolved = env(probe);
  const std::size_t m = measure_in_agent_basis(agent, evolved);
  return decide_and_update(agent, m);
}

bool stage_converged(const AgentState& agent, const StoppingRule& rule) {
  if (rule.kind == StoppingRule::Kind::FixedBudget) {
    if (agent.stage >= rule.budgets.size()) throw Error(Errc::StageOverflow, "no budget for stage");
    return agent.stage_iterations >= rule.budgets[agent.stage];
  }
  return agent.w < rule.w_min;
}

void advance_stage(AgentState& agent) {
  if (agent.stage + 1 >= stage_count(agent.dim)) {
    throw Error(Errc::StageOverflow, "stage " + std::to_string(agent.stage) +
                                         " is the last search stage for dim " +
                                         std::to_string(agent.dim));
  }
  ++agent.stage;
  agent.w = agent.params.w1;
  agent.n_r = 0;
  agent.n_p = 0;
  agent.n_neutral = 0;
  agent.stage_iterations = 0;
}

std::vector<StateVector> extract_eigenvectors(const AgentState& agent) {
  std::vector<StateVector> out;
  out.reserve(agent.dim);
  for (std::size_t j = 0; j < agent.dim; ++j) out.push_back(column(agent.d_matrix, j));
  return out;
}

std::uint64_t run_protocol(AgentState& agent, const Interaction& env, const StoppingRule& rule,
                           const IterationObserver& observer) {
  validate(rule, agent.dim, agent.params.w1);
  std::uint64_t done = 0;
  while (done < rule.max_iterations) {
    const IterationRecord rec = protocol_step(agent, env);
    ++done;
    bool finished = false;
    if (stage_converged(agent, rule)) {
      if (agent.stage + 1 >= stage_count(agent.dim)) {
        finished = true;
      } else {
        advance_stage(agent);
      }
    }
    if (observer) observer(agent, rec);
    if (finished) break;
  }
  return done;
}

}  // namespace qrl
