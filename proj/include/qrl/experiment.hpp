#pragma once

// Monte Carlo driver: runs independent repetitions of the protocol against a
// configured environment and aggregates the mean fidelity curves F_j(k) and
// the mean search range W(k).
//
// Row k of every curve holds the values in force at the start of iteration k
// (row 1 is the untouched agent). Rows are recorded at k = 1, at every
// multiple of record_every, and at the final k.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrl/environment.hpp"
#include "qrl/protocol.hpp"

namespace qrl {

enum class EnvKind { Random, SingleQubitSpec, SpinX, Bell, File };

/// How the repetitions' overlaps are folded into F_j(k).
///   Paper:  max_l (1/N) sum_i |<l_E|D_i|j>|   (needs one shared environment)
///   PerRep: (1/N) sum_i max_l |<l_E^(i)|D_i|j>|
enum class FidelityMode { Paper, PerRep };

std::string_view to_string(EnvKind kind) noexcept;
std::string_view to_string(FidelityMode mode) noexcept;

struct ExperimentConfig {
  std::size_t dim = 2;
  EnvKind env_kind = EnvKind::Random;
  double tau = 1.0;
  double r = 0.9;
  double nu = 2.0;
  double w1 = 1.0;
  /// Saturation of the search range; unset means w1, kUnbounded disables.
  std::optional<double> w_max;
  std::size_t repetitions = 1000;
  std::uint64_t seed = 1;
  StoppingRule stopping = StoppingRule::threshold();
  bool resample_env_per_repetition = false;
  /// 0 picks 1 for dim 2 and 10 otherwise.
  std::size_t record_every = 0;
  FidelityMode fidelity_mode = FidelityMode::PerRep;
  std::string operator_file;       // env_kind == File
  SingleQubitSpec single_qubit;    // env_kind == SingleQubitSpec

  RewardParams reward_params() const;
  std::size_t effective_record_every() const;
};

/// Throws ConfigError on any invalid combination. For EnvKind::File, loads the
/// operator to check its dimension.
void validate(const ExperimentConfig& config);

/// Unknown keys and mistyped values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::uint64_t> ks;
  std::vector<std::size_t> stages;           // least advanced repetition's stage per row
  std::vector<std::vector<double>> fidelity;  // fidelity[j][row]
  std::vector<double> search_range;           // W per row
  /// per_repetition_final[i][l * dim + j] = |<l_E|D_i^(N)|j>|
  std::vector<std::vector<double>> per_repetition_final;
  double diag_residual = 0.0;  // mean over repetitions
  nlohmann::json metadata;

  std::size_t row_of(std::uint64_t k) const;  // OutOfRange if k was not recorded
  double fidelity_at(std::size_t j, std::uint64_t k) const { return fidelity[j][row_of(k)]; }
  double search_range_at(std::uint64_t k) const { return search_range[row_of(k)]; }
};

struct RunOptions {
  unsigned threads = 1;
};

/// Environment used by repetition i (shared unless resampling).
Environment make_environment(const ExperimentConfig& config, std::size_t repetition);

/// Runs repetition i alone, exactly as run_experiment would.
AgentState run_repetition(const ExperimentConfig& config, std::size_t repetition,
                          const IterationObserver& observer = {});

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Eigensystems holds either one shared entry or one per D. Paper mode with
/// per-repetition eigensystems raises ModeMismatch.
double mean_fidelity(std::span<const ComplexMatrix> d_matrices,
                     std::span<const Eigensystem> eigensystems, std::size_t j, FidelityMode mode);

double mean_search_range(std::span<const double> w_values);

/// |offdiag(D^dagger O D)|_F / |O|_F
double verify_diagonalization(const ComplexMatrix& d, const ComplexMatrix& o_e);
double verify_diagonalization(const AgentState& agent, const Environment& env);

enum class ResultFormat { Csv, Json };

std::optional<ResultFormat> format_from_string(std::string_view text) noexcept;

/// CSV: "# metadata: {...}" line, then header k,stage,W,F_0..F_{d-1}. Doubles
/// are written in shortest round-trip form.
void write_results(const ExperimentResult& result, const std::filesystem::path& path,
                   ResultFormat format);

struct ResultCurves {
  std::vector<std::uint64_t> ks;
  std::vector<std::size_t> stages;
  std::vector<double> search_range;
  std::vector<std::vector<double>> fidelity;  // fidelity[j][row]
  nlohmann::json metadata;
};

ResultCurves read_results(const std::filesystem::path& path, ResultFormat format);

/// Version string baked in at configure time.
std::string_view code_version() noexcept;

}  // namespace qrl
