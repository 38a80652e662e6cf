// qrl: run, verify, and replay eigenbasis-learning experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qrl/environment.hpp"
#include "qrl/error.hpp"
#include "qrl/experiment.hpp"
#include "qrl/io.hpp"
#include "qrl/rng.hpp"
#include "qrl/trace.hpp"

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kParse = 2, kRuntime = 3 };

int log_level() {
  const char* env = std::getenv("QRL_LOG");
  if (env == nullptr) return 1;
  const std::string v = env;
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "qrl: " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "qrl: " << msg << '\n';
}

int fail(int code, const std::string& msg) {
  std::cerr << "qrl: error: " << msg << '\n';
  return code;
}

bool is_parse_error(qrl::Errc code) {
  switch (code) {
    case qrl::Errc::ConfigError:
    case qrl::Errc::IoError:
    case qrl::Errc::ModeMismatch:
    case qrl::Errc::NotHermitian:
    case qrl::Errc::BadDim:
    case qrl::Errc::DimMismatch:
      return true;
    default:
      return false;
  }
}

std::string format_list(const std::vector<double>& xs) {
  std::ostringstream out;
  out.precision(6);
  out << '[';
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? ", " : "") << xs[i];
  out << ']';
  return out.str();
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string operator_file;
  std::string trace;
  std::string d_out;
};

int cmd_run(const RunArgs& args) {
  qrl::ExperimentConfig config;
  std::optional<qrl::ResultFormat> format = qrl::format_from_string(args.format);
  if (!format) return fail(kParse, "unknown format '" + args.format + "'");
  try {
    config = qrl::load_config(args.config);
    if (args.seed) config.seed = *args.seed;
    if (!args.operator_file.empty()) {
      config.env_kind = qrl::EnvKind::File;
      config.operator_file = args.operator_file;
    }
    qrl::validate(config);
  } catch (const qrl::Error& e) {
    return fail(kParse, e.what());
  }

  try {
    log_info("running " + std::to_string(config.repetitions) + " repetitions, dim " +
             std::to_string(config.dim) + ", seed " + std::to_string(config.seed));
    const qrl::ExperimentResult result = qrl::run_experiment(config, {args.threads});
    if (!args.out.empty()) {
      qrl::write_results(result, args.out, *format);
      log_info("wrote " + args.out);
    }

    if (!args.trace.empty() || !args.d_out.empty()) {
      std::ofstream trace_file;
      std::optional<qrl::TraceWriter> writer;
      if (!args.trace.empty()) {
        trace_file.open(args.trace, std::ios::binary);
        if (!trace_file) throw qrl::Error(qrl::Errc::IoError, "cannot write " + args.trace);
        writer.emplace(trace_file, config.dim, config.reward_params(),
                       qrl::derive_seed(config.seed, 0));
      }
      const qrl::AgentState agent = qrl::run_repetition(
          config, 0, [&](const qrl::AgentState&, const qrl::IterationRecord& rec) {
            if (writer) writer->write(rec);
          });
      if (writer) {
        writer->finish(agent);
        log_info("wrote trace " + args.trace);
      }
      if (!args.d_out.empty()) qrl::save_matrix_file(args.d_out, agent.d_matrix);
    }

    std::vector<double> final_f;
    for (const auto& curve : result.fidelity) final_f.push_back(curve.back());
    std::cout << "final F = " << format_list(final_f)
              << ", final W = " << result.search_range.back() << '\n';
    log_debug("diag residual " + std::to_string(result.diag_residual));
  } catch (const qrl::Error& e) {
    return fail(kRuntime, e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, e.what());
  }
  return kOk;
}

int cmd_verify(const std::string& op_path, const std::string& d_path, double tol) {
  std::optional<qrl::Environment> env;
  qrl::ComplexMatrix d;
  try {
    env = qrl::load_operator_file(op_path);
    d = qrl::load_matrix_file(d_path);
    if (d.dim() != env->dim()) throw qrl::Error(qrl::Errc::DimMismatch, "dims differ");
  } catch (const qrl::Error& e) {
    return fail(kParse, e.what());
  }

  const double residual = qrl::verify_diagonalization(d, qrl::env_operator_oracle(*env));
  const qrl::Eigensystem eigen = qrl::env_eigensystem_oracle(*env);
  std::vector<double> fidelities;
  for (std::size_t j = 0; j < d.dim(); ++j) {
    fidelities.push_back(qrl::mean_fidelity({&d, 1}, {&eigen, 1}, j, qrl::FidelityMode::PerRep));
  }
  std::cout << "diag_residual = " << residual << '\n'
            << "F = " << format_list(fidelities) << '\n';
  if (!(residual < tol)) {
    std::cerr << "qrl: residual " << residual << " is not below tolerance " << tol << '\n';
    return kFailed;
  }
  return kOk;
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail(kParse, "cannot open " + path);
  try {
    const qrl::ReplayResult res = qrl::replay_trace(in);
    if (!res.matched) {
      std::cout << "DIVERGED after " << res.iterations << " iterations: " << res.detail << '\n';
      return kFailed;
    }
    std::cout << "OK " << res.iterations << " iterations, d_hash " << res.actual_hash << '\n';
    return kOk;
  } catch (const qrl::Error& e) {
    return fail(kParse, e.what());
  }
}

struct GenArgs {
  std::string kind = "random";
  std::size_t dim = 2;
  double tau = 1.0;
  std::uint64_t seed = 1;
  qrl::SingleQubitSpec spec;
  std::string out;
  std::string eigenbasis_out;
};

int cmd_gen_operator(const GenArgs& args) {
  try {
    std::optional<qrl::Environment> env;
    if (args.kind == "random") {
      env = qrl::env_random(args.dim, args.tau, args.seed);
    } else if (args.kind == "bell") {
      env = qrl::env_bell(args.tau);
    } else if (args.kind == "spin-x") {
      env = qrl::env_spin_x(args.tau);
    } else if (args.kind == "single-qubit") {
      env = qrl::env_single_qubit(args.spec, args.tau);
    } else {
      return fail(kParse, "unknown operator kind '" + args.kind + "'");
    }
    qrl::save_operator_file(args.out, *env);
    if (!args.eigenbasis_out.empty()) {
      qrl::save_matrix_file(args.eigenbasis_out, qrl::env_eigensystem_oracle(*env).eigenvectors);
    }
  } catch (const qrl::Error& e) {
    return fail(is_parse_error(e.code()) ? kParse : kRuntime, e.what());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenbasis learning by measurement feedback"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qrl::code_version()));

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", run.out, "Result file");
  run_cmd->add_option("--format", run.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--operator-file", run.operator_file, "Use this operator as environment");
  run_cmd->add_option("--trace", run.trace, "Write the trace of repetition 0");
  run_cmd->add_option("--d-out", run.d_out, "Write the final D of repetition 0");

  std::string op_path, d_path;
  double tol = 0.2;
  auto* verify_cmd = app.add_subcommand("verify", "Check a learned D against an operator");
  verify_cmd->add_option("--operator", op_path, "Operator file")->required();
  verify_cmd->add_option("--dmatrix", d_path, "Matrix file")->required();
  verify_cmd->add_option("--tol", tol, "Residual tolerance");

  std::string trace_path;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a trace and check the final hash");
  replay_cmd->add_option("--trace", trace_path, "Trace file")->required();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-operator", "Write an operator file");
  gen_cmd->add_option("--kind", gen.kind, "random, bell, spin-x or single-qubit");
  gen_cmd->add_option("--dim", gen.dim, "Dimension (random only)");
  gen_cmd->add_option("--tau", gen.tau, "Interaction time");
  gen_cmd->add_option("--seed", gen.seed, "Seed (random only)");
  gen_cmd->add_option("--alpha", gen.spec.alpha);
  gen_cmd->add_option("--beta", gen.spec.beta);
  gen_cmd->add_option("--lambda0", gen.spec.lambda0);
  gen_cmd->add_option("--lambda1", gen.spec.lambda1);
  gen_cmd->add_option("--out", gen.out, "Operator file")->required();
  gen_cmd->add_option("--eigenbasis-out", gen.eigenbasis_out, "Also write the exact eigenbasis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  if (*run_cmd) return cmd_run(run);
  if (*verify_cmd) return cmd_verify(op_path, d_path, tol);
  if (*replay_cmd) return cmd_replay(trace_path);
  return cmd_gen_operator(gen);
}
