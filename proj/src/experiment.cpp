#include "qrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qrl/error.hpp"
#include "qrl/io.hpp"
#include "qrl/rng.hpp"

#ifndef QRL_CODE_VERSION
#define QRL_CODE_VERSION "unknown"
#endif

namespace qrl {

using nlohmann::json;

namespace {

constexpr std::uint64_t kEnvStream = 0xE4E4'0000'0000'0000ULL;
constexpr std::size_t kBlockSize = 64;

// ---------------------------------------------------------------- config I/O

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("invalid '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  if (!j.is_object()) throw Error(Errc::ConfigError, std::string(where) + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(Errc::ConfigError,
                  "unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

EnvKind env_kind_from(const std::string& text) {
  if (text == "random") return EnvKind::Random;
  if (text == "single-qubit-spec") return EnvKind::SingleQubitSpec;
  if (text == "spin-x") return EnvKind::SpinX;
  if (text == "bell") return EnvKind::Bell;
  if (text == "file") return EnvKind::File;
  throw Error(Errc::ConfigError, "unknown env_kind '" + text + "'");
}

FidelityMode fidelity_mode_from(const std::string& text) {
  if (text == "paper") return FidelityMode::Paper;
  if (text == "per-rep") return FidelityMode::PerRep;
  throw Error(Errc::ConfigError, "unknown fidelity_mode '" + text + "'");
}

StoppingRule stopping_from_json(const json& j) {
  reject_unknown(j, {"kind", "budgets", "w_min", "max_iterations"}, "stopping");
  StoppingRule rule;
  const std::string kind = j.contains("kind") ? get_as<std::string>(j, "kind") : "threshold";
  if (kind == "fixed-budget") {
    rule.kind = StoppingRule::Kind::FixedBudget;
  } else if (kind != "threshold") {
    throw Error(Errc::ConfigError, "unknown stopping kind '" + kind + "'");
  }
  if (j.contains("budgets")) rule.budgets = get_as<std::vector<std::uint64_t>>(j, "budgets");
  if (j.contains("w_min")) rule.w_min = get_as<double>(j, "w_min");
  if (j.contains("max_iterations")) rule.max_iterations = get_as<std::uint64_t>(j, "max_iterations");
  return rule;
}

json stopping_to_json(const StoppingRule& rule) {
  return {{"kind", rule.kind == StoppingRule::Kind::FixedBudget ? "fixed-budget" : "threshold"},
          {"budgets", rule.budgets},
          {"w_min", rule.w_min},
          {"max_iterations", rule.max_iterations}};
}

std::size_t default_dim(EnvKind kind, const json& j) {
  switch (kind) {
    case EnvKind::Bell: return 4;
    case EnvKind::File:
      if (j.contains("operator_file")) {
        return load_operator_file(get_as<std::string>(j, "operator_file")).dim();
      }
      return 2;
    default: return 2;
  }
}

// ---------------------------------------------------------------- numerics

// table[l * dim + j] = |<l_E| D |j>|
std::vector<double> amplitude_table(const ComplexMatrix& d, const ComplexMatrix& eigvecs) {
  const std::size_t n = d.dim();
  std::vector<double> table(n * n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j) {
      Complex amp{};
      for (std::size_t i = 0; i < n; ++i) amp += std::conj(eigvecs(i, l)) * d(i, j);
      table[l * n + j] = std::abs(amp);
    }
  return table;
}

std::vector<double> column_maxima(const std::vector<double>& table, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j) out[j] = std::max(out[j], table[l * n + j]);
  return out;
}

// ---------------------------------------------------------------- repetitions

struct Snapshot {
  double w = 0.0;
  std::size_t stage = 0;
  std::vector<double> values;
};

struct RepOutcome {
  std::vector<Snapshot> slots;
  Snapshot last;
  std::uint64_t final_k = 1;
  std::vector<double> final_table;
  double residual = 0.0;
};

class SlotGrid {
 public:
  explicit SlotGrid(std::size_t stride) : stride_(stride) {}

  bool is_slot(std::uint64_t k) const { return k == 1 || k % stride_ == 0; }
  std::uint64_t k_of(std::size_t slot) const {
    if (stride_ == 1) return slot + 1;
    return slot == 0 ? 1 : slot * stride_;
  }

 private:
  std::uint64_t stride_;
};

AgentState run_repetition_with(const ExperimentConfig& config, std::size_t repetition,
                               const Environment& env, const IterationObserver& observer) {
  AgentState agent =
      protocol_init(config.dim, config.reward_params(), derive_seed(config.seed, repetition));
  run_protocol(agent, env.interaction(), config.stopping, observer);
  return agent;
}

RepOutcome simulate(const ExperimentConfig& config, std::size_t repetition, const Environment& env,
                    const Eigensystem& eigen, const SlotGrid& grid) {
  const std::size_t n = config.dim;
  const bool paper = config.fidelity_mode == FidelityMode::Paper;
  RepOutcome out;
  auto snapshot = [&](const AgentState& agent) {
    Snapshot s;
    s.w = agent.w;
    s.stage = agent.stage;
    std::vector<double> table = amplitude_table(agent.d_matrix, eigen.eigenvectors);
    s.values = paper ? std::move(table) : column_maxima(table, n);
    return s;
  };

  AgentState initial = protocol_init(n, config.reward_params(), 0);
  out.slots.push_back(snapshot(initial));
  const AgentState agent = run_repetition_with(
      config, repetition, env, [&](const AgentState& a, const IterationRecord&) {
        if (grid.is_slot(a.k)) out.slots.push_back(snapshot(a));
      });

  out.last = snapshot(agent);
  out.final_k = agent.k;
  out.final_table = amplitude_table(agent.d_matrix, eigen.eigenvectors);
  out.residual = verify_diagonalization(agent.d_matrix, env_operator_oracle(env));
  return out;
}

// Sums each row over repetitions in index order, whatever the block layout.
class CurveAccumulator {
 public:
  explicit CurveAccumulator(std::size_t width) : width_(width) {}

  void add(const RepOutcome& rep) {
    if (rep.slots.size() > w_sum_.size()) grow(rep.slots.size());
    for (std::size_t s = 0; s < w_sum_.size(); ++s) {
      add_into(s, s < rep.slots.size() ? rep.slots[s] : rep.last);
    }
    finals_.push_back(rep.last);
    max_final_k_ = std::max(max_final_k_, rep.final_k);
  }

  std::size_t rows() const { return w_sum_.size(); }
  std::uint64_t max_final_k() const { return max_final_k_; }

  /// Appends a row built from every repetition's final snapshot.
  void append_final_row() {
    grow(w_sum_.size() + 1);
  }

  double w_sum(std::size_t row) const { return w_sum_[row]; }
  std::size_t stage_min(std::size_t row) const { return stage_min_[row]; }
  const double* values(std::size_t row) const { return &values_[row * width_]; }

 private:
  void grow(std::size_t rows) {
    const std::size_t old = w_sum_.size();
    w_sum_.resize(rows, 0.0);
    stage_min_.resize(rows, std::numeric_limits<std::size_t>::max());
    values_.resize(rows * width_, 0.0);
    for (std::size_t s = old; s < rows; ++s)
      for (const Snapshot& f : finals_) add_into(s, f);
  }

  void add_into(std::size_t row, const Snapshot& snap) {
    w_sum_[row] += snap.w;
    stage_min_[row] = std::min(stage_min_[row], snap.stage);
    for (std::size_t c = 0; c < width_; ++c) values_[row * width_ + c] += snap.values[c];
  }

  std::size_t width_;
  std::vector<double> w_sum_;
  std::vector<std::size_t> stage_min_;
  std::vector<double> values_;
  std::vector<Snapshot> finals_;
  std::uint64_t max_final_k_ = 1;
};

// ---------------------------------------------------------------- CSV helpers

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double out = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(Errc::IoError, "bad number '" + std::string(text) + "'");
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

constexpr std::string_view kMetadataPrefix = "# metadata: ";

}  // namespace

// ---------------------------------------------------------------- public API

std::string_view to_string(EnvKind kind) noexcept {
  switch (kind) {
    case EnvKind::Random: return "random";
    case EnvKind::SingleQubitSpec: return "single-qubit-spec";
    case EnvKind::SpinX: return "spin-x";
    case EnvKind::Bell: return "bell";
    case EnvKind::File: return "file";
  }
  return "unknown";
}

std::string_view to_string(FidelityMode mode) noexcept {
  return mode == FidelityMode::Paper ? "paper" : "per-rep";
}

std::string_view code_version() noexcept { return QRL_CODE_VERSION; }

RewardParams ExperimentConfig::reward_params() const {
  return RewardParams{r, nu, w1, w_max.value_or(w1)};
}

std::size_t ExperimentConfig::effective_record_every() const {
  if (record_every != 0) return record_every;
  return dim == 2 ? 1 : 10;
}

void validate(const ExperimentConfig& config) {
  if (config.dim < 2 || config.dim > kMaxDim) {
    throw Error(Errc::ConfigError, "dim must be in [2, 64]");
  }
  if (config.repetitions < 1) throw Error(Errc::ConfigError, "repetitions must be >= 1");
  if (!std::isfinite(config.tau)) throw Error(Errc::ConfigError, "tau must be finite");
  validate(config.reward_params());
  validate(config.stopping, config.dim, config.w1);
  switch (config.env_kind) {
    case EnvKind::SpinX:
    case EnvKind::SingleQubitSpec:
      if (config.dim != 2) throw Error(Errc::ConfigError, "single-qubit env needs dim 2");
      break;
    case EnvKind::Bell:
      if (config.dim != 4) throw Error(Errc::ConfigError, "bell env needs dim 4");
      break;
    case EnvKind::File: {
      if (config.operator_file.empty()) throw Error(Errc::ConfigError, "operator_file not set");
      if (load_operator_file(config.operator_file).dim() != config.dim) {
        throw Error(Errc::ConfigError, "operator_file dim does not match config dim");
      }
      break;
    }
    case EnvKind::Random: break;
  }
  if (config.fidelity_mode == FidelityMode::Paper && config.resample_env_per_repetition) {
    throw Error(Errc::ModeMismatch, "fidelity_mode 'paper' needs a shared environment");
  }
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"dim", "env_kind", "tau", "r", "nu", "w1", "w_max", "repetitions", "seed",
                  "stopping", "resample_env_per_repetition", "record_every", "fidelity_mode",
                  "operator_file", "single_qubit"},
                 "config");
  ExperimentConfig c;
  if (j.contains("env_kind")) c.env_kind = env_kind_from(get_as<std::string>(j, "env_kind"));
  c.dim = j.contains("dim") ? get_as<std::size_t>(j, "dim") : default_dim(c.env_kind, j);
  if (j.contains("tau")) c.tau = get_as<double>(j, "tau");
  if (j.contains("r")) c.r = get_as<double>(j, "r");
  if (j.contains("nu")) c.nu = get_as<double>(j, "nu");
  if (j.contains("w1")) c.w1 = get_as<double>(j, "w1");
  if (j.contains("w_max")) {
    const json& w = j["w_max"];
    if (w.is_string() && w.get<std::string>() == "unbounded") {
      c.w_max = kUnbounded;
    } else {
      c.w_max = get_as<double>(j, "w_max");
    }
  }
  if (j.contains("repetitions")) c.repetitions = get_as<std::size_t>(j, "repetitions");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("stopping")) c.stopping = stopping_from_json(j["stopping"]);
  if (j.contains("resample_env_per_repetition")) {
    c.resample_env_per_repetition = get_as<bool>(j, "resample_env_per_repetition");
  }
  if (j.contains("record_every")) c.record_every = get_as<std::size_t>(j, "record_every");
  if (j.contains("fidelity_mode")) {
    c.fidelity_mode = fidelity_mode_from(get_as<std::string>(j, "fidelity_mode"));
  }
  if (j.contains("operator_file")) c.operator_file = get_as<std::string>(j, "operator_file");
  if (j.contains("single_qubit")) {
    const json& s = j["single_qubit"];
    reject_unknown(s, {"alpha", "beta", "lambda0", "lambda1"}, "single_qubit");
    if (s.contains("alpha")) c.single_qubit.alpha = get_as<double>(s, "alpha");
    if (s.contains("beta")) c.single_qubit.beta = get_as<double>(s, "beta");
    if (s.contains("lambda0")) c.single_qubit.lambda0 = get_as<double>(s, "lambda0");
    if (s.contains("lambda1")) c.single_qubit.lambda1 = get_as<double>(s, "lambda1");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j = {{"dim", c.dim},
            {"env_kind", std::string(to_string(c.env_kind))},
            {"tau", c.tau},
            {"r", c.r},
            {"nu", c.nu},
            {"w1", c.w1},
            {"repetitions", c.repetitions},
            {"seed", c.seed},
            {"stopping", stopping_to_json(c.stopping)},
            {"resample_env_per_repetition", c.resample_env_per_repetition},
            {"record_every", c.record_every},
            {"fidelity_mode", std::string(to_string(c.fidelity_mode))}};
  if (c.w_max) {
    j["w_max"] = std::isinf(*c.w_max) ? json("unbounded") : json(*c.w_max);
  }
  if (c.env_kind == EnvKind::File) j["operator_file"] = c.operator_file;
  if (c.env_kind == EnvKind::SingleQubitSpec) {
    j["single_qubit"] = {{"alpha", c.single_qubit.alpha},
                         {"beta", c.single_qubit.beta},
                         {"lambda0", c.single_qubit.lambda0},
                         {"lambda1", c.single_qubit.lambda1}};
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  // Relative operator paths resolve against the config file's directory.
  if (j.is_object() && j.contains("operator_file") && j["operator_file"].is_string()) {
    const std::filesystem::path op = j["operator_file"].get<std::string>();
    if (op.is_relative() && std::filesystem::exists(path.parent_path() / op)) {
      j["operator_file"] = (path.parent_path() / op).string();
    }
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw Error(Errc::ConfigError, e.what());
  }
}

std::size_t ExperimentResult::row_of(std::uint64_t k) const {
  const auto it = std::lower_bound(ks.begin(), ks.end(), k);
  if (it == ks.end() || *it != k) {
    throw Error(Errc::OutOfRange, "k=" + std::to_string(k) + " was not recorded");
  }
  return static_cast<std::size_t>(it - ks.begin());
}

Environment make_environment(const ExperimentConfig& config, std::size_t repetition) {
  switch (config.env_kind) {
    case EnvKind::Random: {
      const std::uint64_t env_seed =
          config.resample_env_per_repetition
              ? derive_seed(derive_seed(config.seed, kEnvStream), repetition)
              : derive_seed(config.seed, kEnvStream);
      return env_random(config.dim, config.tau, env_seed);
    }
    case EnvKind::SingleQubitSpec: return env_single_qubit(config.single_qubit, config.tau);
    case EnvKind::SpinX: return env_spin_x(config.tau);
    case EnvKind::Bell: return env_bell(config.tau);
    case EnvKind::File: return load_operator_file(config.operator_file);
  }
  throw Error(Errc::ConfigError, "unknown env kind");
}

AgentState run_repetition(const ExperimentConfig& config, std::size_t repetition,
                          const IterationObserver& observer) {
  validate(config);
  return run_repetition_with(config, repetition, make_environment(config, repetition), observer);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  const std::size_t n = config.dim;
  const std::size_t reps = config.repetitions;
  const bool shared = !config.resample_env_per_repetition;
  const bool paper = config.fidelity_mode == FidelityMode::Paper;
  const SlotGrid grid(config.effective_record_every());

  std::optional<Environment> shared_env;
  std::optional<Eigensystem> shared_eigen;
  if (shared) {
    shared_env = make_environment(config, 0);
    shared_eigen = env_eigensystem_oracle(*shared_env);
  }

  ExperimentResult result;
  result.config = config;
  result.per_repetition_final.reserve(reps);
  CurveAccumulator acc(paper ? n * n : n);
  double residual_sum = 0.0;

  const unsigned threads = std::max(1U, options.threads);
  for (std::size_t begin = 0; begin < reps; begin += kBlockSize) {
    const std::size_t end = std::min(reps, begin + kBlockSize);
    std::vector<RepOutcome> block(end - begin);
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
      for (std::size_t i = next++; i < end; i = next++) {
        try {
          if (shared) {
            block[i - begin] = simulate(config, i, *shared_env, *shared_eigen, grid);
          } else {
            const Environment env = make_environment(config, i);
            block[i - begin] = simulate(config, i, env, env_eigensystem_oracle(env), grid);
          }
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };

    const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(threads, end - begin));
    if (pool <= 1) {
      worker();
    } else {
      std::vector<std::jthread> workers;
      for (unsigned t = 0; t < pool; ++t) workers.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (RepOutcome& rep : block) {
      acc.add(rep);
      residual_sum += rep.residual;
      result.per_repetition_final.push_back(std::move(rep.final_table));
    }
  }

  std::vector<std::uint64_t> ks;
  for (std::size_t s = 0; s < acc.rows(); ++s) ks.push_back(grid.k_of(s));
  if (ks.back() != acc.max_final_k()) {
    acc.append_final_row();
    ks.push_back(acc.max_final_k());
  }

  const double inv = 1.0 / static_cast<double>(reps);
  result.ks = ks;
  result.stages.resize(ks.size());
  result.search_range.resize(ks.size());
  result.fidelity.assign(n, std::vector<double>(ks.size()));
  for (std::size_t row = 0; row < ks.size(); ++row) {
    result.stages[row] = acc.stage_min(row);
    result.search_range[row] = acc.w_sum(row) * inv;
    const double* vals = acc.values(row);
    for (std::size_t j = 0; j < n; ++j) {
      double f = 0.0;
      if (paper) {
        for (std::size_t l = 0; l < n; ++l) f = std::max(f, vals[l * n + j] * inv);
      } else {
        f = vals[j] * inv;
      }
      result.fidelity[j][row] = std::min(1.0, f);
    }
  }
  result.diag_residual = residual_sum * inv;
  result.metadata = {{"config", config_to_json(config)},
                     {"seed", config.seed},
                     {"repetitions", reps},
                     {"code_version", std::string(code_version())}};
  return result;
}

double mean_fidelity(std::span<const ComplexMatrix> d_matrices,
                     std::span<const Eigensystem> eigensystems, std::size_t j, FidelityMode mode) {
  if (d_matrices.empty()) throw Error(Errc::OutOfRange, "no repetitions");
  const bool per_rep_eigen = eigensystems.size() == d_matrices.size() && eigensystems.size() > 1;
  if (eigensystems.size() != 1 && !per_rep_eigen) {
    throw Error(Errc::DimMismatch, "need one shared eigensystem or one per repetition");
  }
  if (mode == FidelityMode::Paper && per_rep_eigen) {
    throw Error(Errc::ModeMismatch, "paper mode needs a shared eigensystem");
  }
  const std::size_t n = d_matrices.front().dim();
  for (const auto& d : d_matrices)
    if (d.dim() != n) throw Error(Errc::DimMismatch, "repetition dims differ");
  for (const auto& e : eigensystems)
    if (e.dim() != n) throw Error(Errc::DimMismatch, "eigensystem dim differs");
  if (j >= n) throw Error(Errc::OutOfRange, "column index");

  const double inv = 1.0 / static_cast<double>(d_matrices.size());
  if (mode == FidelityMode::Paper) {
    std::vector<double> sums(n, 0.0);
    for (const auto& d : d_matrices) {
      const auto table = amplitude_table(d, eigensystems.front().eigenvectors);
      for (std::size_t l = 0; l < n; ++l) sums[l] += table[l * n + j];
    }
    return std::min(1.0, *std::max_element(sums.begin(), sums.end()) * inv);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < d_matrices.size(); ++i) {
    const Eigensystem& e = per_rep_eigen ? eigensystems[i] : eigensystems.front();
    sum += column_maxima(amplitude_table(d_matrices[i], e.eigenvectors), n)[j];
  }
  return std::min(1.0, sum * inv);
}

double mean_search_range(std::span<const double> w_values) {
  if (w_values.empty()) throw Error(Errc::OutOfRange, "no repetitions");
  double sum = 0.0;
  for (double w : w_values) sum += w;
  return sum / static_cast<double>(w_values.size());
}

double verify_diagonalization(const ComplexMatrix& d, const ComplexMatrix& o_e) {
  if (d.dim() != o_e.dim()) throw Error(Errc::DimMismatch, "D and operator dims differ");
  const ComplexMatrix m = d.adjoint() * o_e * d;
  double off = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      if (i != j) off += std::norm(m(i, j));
  const double norm = frobenius_norm(o_e);
  return norm == 0.0 ? 0.0 : std::sqrt(off) / norm;
}

double verify_diagonalization(const AgentState& agent, const Environment& env) {
  return verify_diagonalization(agent.d_matrix, env_operator_oracle(env));
}

std::optional<ResultFormat> format_from_string(std::string_view text) noexcept {
  if (text == "csv") return ResultFormat::Csv;
  if (text == "json") return ResultFormat::Json;
  return std::nullopt;
}

void write_results(const ExperimentResult& result, const std::filesystem::path& path,
                   ResultFormat format) {
  if (result.ks.empty() || result.fidelity.empty()) {
    throw Error(Errc::IoError, "refusing to write an empty curve");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());

  if (format == ResultFormat::Json) {
    json j = {{"metadata", result.metadata},
              {"k", result.ks},
              {"stage", result.stages},
              {"W", result.search_range},
              {"F", result.fidelity},
              {"per_repetition_final", result.per_repetition_final},
              {"diag_residual", result.diag_residual}};
    out << j.dump() << '\n';
  } else {
    out << kMetadataPrefix << result.metadata.dump() << '\n';
    out << "k,stage,W";
    for (std::size_t j = 0; j < result.fidelity.size(); ++j) out << ",F_" << j;
    out << '\n';
    for (std::size_t row = 0; row < result.ks.size(); ++row) {
      out << result.ks[row] << ',' << result.stages[row] << ','
          << format_double(result.search_range[row]);
      for (const auto& f : result.fidelity) out << ',' << format_double(f[row]);
      out << '\n';
    }
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

ResultCurves read_results(const std::filesystem::path& path, ResultFormat format) {
  ResultCurves curves;
  if (format == ResultFormat::Json) {
    const json j = read_json_file(path);
    try {
      curves.metadata = j.at("metadata");
      curves.ks = j.at("k").get<std::vector<std::uint64_t>>();
      curves.stages = j.at("stage").get<std::vector<std::size_t>>();
      curves.search_range = j.at("W").get<std::vector<double>>();
      curves.fidelity = j.at("F").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw Error(Errc::IoError, path.string() + ": " + e.what());
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::string line;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line.starts_with(kMetadataPrefix)) {
        curves.metadata = json::parse(line.substr(kMetadataPrefix.size()));
        continue;
      }
      const auto cells = split_commas(line);
      if (columns == 0) {
        if (cells.size() < 4 || cells[0] != "k") throw Error(Errc::IoError, "bad CSV header");
        columns = cells.size();
        curves.fidelity.resize(columns - 3);
        continue;
      }
      if (cells.size() != columns) throw Error(Errc::IoError, "ragged CSV row");
      curves.ks.push_back(static_cast<std::uint64_t>(parse_double(cells[0])));
      curves.stages.push_back(static_cast<std::size_t>(parse_double(cells[1])));
      curves.search_range.push_back(parse_double(cells[2]));
      for (std::size_t c = 3; c < columns; ++c) curves.fidelity[c - 3].push_back(parse_double(cells[c]));
    }
  }
  if (curves.ks.empty()) throw Error(Errc::IoError, "empty curve in " + path.string());
  return curves;
}

}  // namespace qrl
