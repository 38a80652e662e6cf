#pragma once

// The measurement-feedback learning loop. Each iteration prepares the probe
// D|t> for the current stage t, sends it through the environment, measures
// in the agent basis {D|j>} with a single shot, and then either rewards
// (narrow the search range) or punishes (apply a pseudo-random two-level
// rotation D <- D u and widen the search range).
//
// This layer sees the environment only through an Interaction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "qrl/interaction.hpp"
#include "qrl/linalg.hpp"
#include "qrl/rng.hpp"

namespace qrl {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// D is re-orthonormalized after every this many completed iterations.
inline constexpr std::uint64_t kReorthonormalizeEvery = 10'000;

struct RewardParams {
  double r = 0.9;      // reward rate, (0, 1)
  double nu = 2.0;     // r * p, >= 1
  double w1 = 1.0;     // initial search range (multiplier of pi)
  double w_max = 1.0;  // punishments saturate here; kUnbounded disables

  double p() const noexcept { return nu / r; }

  /// w_max = w1.
  static RewardParams clamped(double r, double nu, double w1 = 1.0) { return {r, nu, w1, w1}; }
  static RewardParams unbounded(double r, double nu, double w1 = 1.0) {
    return {r, nu, w1, kUnbounded};
  }
};

/// Throws ConfigError unless 0 < r < 1, nu >= 1, w1 > 0, w_max >= w1.
void validate(const RewardParams& params);

enum class Outcome { Reward, Punish, Neutral };

std::string_view to_string(Outcome outcome) noexcept;
std::optional<Outcome> outcome_from_string(std::string_view text) noexcept;

struct AgentState {
  std::size_t dim = 0;
  RewardParams params;
  ComplexMatrix d_matrix;  // accumulated D^(k)
  double w = 0.0;
  std::size_t stage = 0;
  std::uint64_t k = 1;  // index of the next iteration
  // Per-stage counters; advance_stage() zeroes them.
  std::uint64_t n_r = 0;
  std::uint64_t n_p = 0;
  std::uint64_t n_neutral = 0;
  std::uint64_t stage_iterations = 0;
  Rng rng;
};

struct IterationRecord {
  std::uint64_t k = 0;
  std::size_t stage = 0;
  std::size_t outcome_m = 0;
  Outcome classification = Outcome::Reward;
  std::optional<RotationAngles> angles;  // present iff Punish
  double w_after = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct StoppingRule {
  enum class Kind { FixedBudget, Threshold };

  Kind kind = Kind::Threshold;
  std::vector<std::uint64_t> budgets;  // one per stage (dim - 1 entries)
  double w_min = 1e-3;
  std::uint64_t max_iterations = 1'000'000;

  static StoppingRule fixed_budget(std::vector<std::uint64_t> budgets) {
    StoppingRule rule;
    rule.kind = Kind::FixedBudget;
    rule.budgets = std::move(budgets);
    return rule;
  }
  static StoppingRule threshold(double w_min = 1e-3, std::uint64_t max_iterations = 1'000'000) {
    StoppingRule rule;
    rule.w_min = w_min;
    rule.max_iterations = max_iterations;
    return rule;
  }
};

/// Throws ConfigError when the rule cannot drive a dim-dimensional agent.
void validate(const StoppingRule& rule, std::size_t dim, double w1);

/// Number of search stages for a dim-dimensional agent; the last column of D
/// is fixed by unitarity once the others are learned.
inline std::size_t stage_count(std::size_t dim) noexcept { return dim - 1; }

AgentState protocol_init(std::size_t dim, const RewardParams& params, std::uint64_t seed);

/// D^(k)|t> for the current stage t.
StateVector prepare_probe(const AgentState& agent);

/// q_j = |<j| D^dagger |evolved>|^2
std::vector<double> outcome_probabilities(const AgentState& agent, const StateVector& evolved);

/// Single-shot measurement of `evolved` in the agent basis, drawn from the
/// agent's generator.
std::size_t measure_in_agent_basis(AgentState& agent, const StateVector& evolved);

/// Feedback for outcome m at stage t: m == t rewards, m > t punishes with a
/// fresh rotation on {t, m}, m < t is neutral.
IterationRecord decide_and_update(AgentState& agent, std::size_t m);

/// Re-applies a recorded iteration (outcome and angles) without drawing from
/// the generator. Handles the stage transition when the record opens the next
/// stage. Throws TraceError when the record is inconsistent with the agent.
IterationRecord apply_record(AgentState& agent, const IterationRecord& record);

/// One full iteration: probe, interact, measure, decide.
IterationRecord protocol_step(AgentState& agent, const Interaction& env);

bool stage_converged(const AgentState& agent, const StoppingRule& rule);

/// Restarts the search range for the next stage, keeping D. StageOverflow past
/// the last stage.
void advance_stage(AgentState& agent);

/// Columns of D, the current eigenvector approximations.
std::vector<StateVector> extract_eigenvectors(const AgentState& agent);

using IterationObserver = std::function<void(const AgentState&, const IterationRecord&)>;

/// Iterates until the last stage converges or rule.max_iterations is reached.
/// The observer runs after every iteration, after any stage advance, so it
/// sees the state in force at the start of iteration agent.k. Returns the
/// number of iterations performed.
std::uint64_t run_protocol(AgentState& agent, const Interaction& env, const StoppingRule& rule,
                           const IterationObserver& observer = {});

}  // namespace qrl
