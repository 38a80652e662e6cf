#include <sys/wait.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "qrl/environment.hpp"
#include "qrl/io.hpp"
#include "qrl/trace.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qrl_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = std::string("QRL_LOG=quiet \"") + QRL_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(log);
  return o;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << body;
  return path;
}

const char* kSmallQubit = R"({"repetitions": 50, "seed": 5,
  "stopping": {"kind": "fixed-budget", "budgets": [80]}})";

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("run") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, kSmallQubit);

  SUBCASE("writes a csv and a summary") {
    const Outcome o = run_cli("run --config " + q(cfg) + " --out " + q(dir / "a.csv"), dir);
    CHECK(o.code == 0);
    CHECK(o.out.find("final F = [") != std::string::npos);
    CHECK(o.out.find("final W = ") != std::string::npos);
    const std::string csv = slurp(dir / "a.csv");
    CHECK(csv.rfind("# metadata: ", 0) == 0);
    CHECK(csv.find("k,stage,W,F_0,F_1") != std::string::npos);
  }
  SUBCASE("json output") {
    CHECK(run_cli("run --config " + q(cfg) + " --format json --out " + q(dir / "a.json"), dir).code == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(j.contains("metadata"));
  }
  SUBCASE("repeat runs are byte identical, seeds differ") {
    const std::string base = "run --config " + q(cfg) + " --out ";
    REQUIRE(run_cli(base + q(dir / "a.csv"), dir).code == 0);
    REQUIRE(run_cli(base + q(dir / "b.csv") + " --threads 3", dir).code == 0);
    REQUIRE(run_cli(base + q(dir / "s7.csv") + " --seed 7", dir).code == 0);
    REQUIRE(run_cli(base + q(dir / "s7b.csv") + " --seed 7", dir).code == 0);
    REQUIRE(run_cli(base + q(dir / "s8.csv") + " --seed 8", dir).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "s7.csv") == slurp(dir / "s7b.csv"));
    CHECK(slurp(dir / "s7.csv") != slurp(dir / "s8.csv"));
  }
  SUBCASE("bad input exits 2") {
    CHECK(run_cli("run --config " + q(dir / "absent.json"), dir).code == 2);
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"repetitions": 3, "colour": "red"})";
    CHECK(run_cli("run --config " + q(bad), dir).code == 2);
    std::ofstream(bad, std::ios::trunc) << "{not json";
    CHECK(run_cli("run --config " + q(bad), dir).code == 2);
    CHECK(run_cli("run", dir).code == 2);
    CHECK(run_cli("frobnicate", dir).code == 2);
  }
  SUBCASE("operator override") {
    REQUIRE(run_cli("gen-operator --kind spin-x --out " + q(dir / "sx.json"), dir).code == 0);
    const Outcome o = run_cli("run --config " + q(cfg) + " --operator-file " + q(dir / "sx.json") +
                              " --out " + q(dir / "sx.csv"),
                          dir);
    CHECK(o.code == 0);
    CHECK(slurp(dir / "sx.csv").find("\"env_kind\":\"file\"") != std::string::npos);
  }
}

TEST_CASE("verify") {
  const fs::path dir = scratch("verify");

  SUBCASE("exact eigenbasis passes") {
    REQUIRE(run_cli("gen-operator --kind random --dim 3 --seed 4 --out " + q(dir / "op.json") +
                    " --eigenbasis-out " + q(dir / "v.json"),
                dir)
                .code == 0);
    const Outcome o = run_cli("verify --operator " + q(dir / "op.json") + " --dmatrix " + q(dir / "v.json"), dir);
    CHECK(o.code == 0);
    CHECK(o.out.find("diag_residual = ") != std::string::npos);
  }
  SUBCASE("identity fails on a non-diagonal operator") {
    REQUIRE(run_cli("gen-operator --kind spin-x --out " + q(dir / "sx.json"), dir).code == 0);
    qrl::save_matrix_file(dir / "id.json", qrl::ComplexMatrix::identity(2));
    CHECK(run_cli("verify --operator " + q(dir / "sx.json") + " --dmatrix " + q(dir / "id.json"), dir).code == 1);
  }
  SUBCASE("bell basis diagonalizes the bell operator") {
    REQUIRE(run_cli("gen-operator --kind bell --out " + q(dir / "b.json"), dir).code == 0);
    const double s = 1.0 / std::sqrt(2.0);
    qrl::ComplexMatrix d(4);
    d(0, 0) = s, d(3, 0) = s;
    d(0, 1) = s, d(3, 1) = -s;
    d(1, 2) = s, d(2, 2) = s;
    d(1, 3) = s, d(2, 3) = -s;
    qrl::save_matrix_file(dir / "d.json", d);
    const Outcome o = run_cli("verify --operator " + q(dir / "b.json") + " --dmatrix " + q(dir / "d.json"), dir);
    REQUIRE(o.code == 0);
    const auto pos = o.out.find("diag_residual = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(o.out.substr(pos + 16)) < 1e-9);
  }
  SUBCASE("bad files exit 2") {
    std::ofstream(dir / "junk.json") << "[1, 2";
    REQUIRE(run_cli("gen-operator --kind spin-x --out " + q(dir / "sx.json"), dir).code == 0);
    CHECK(run_cli("verify --operator " + q(dir / "sx.json") + " --dmatrix " + q(dir / "junk.json"), dir).code == 2);
    qrl::save_matrix_file(dir / "id3.json", qrl::ComplexMatrix::identity(3));
    CHECK(run_cli("verify --operator " + q(dir / "sx.json") + " --dmatrix " + q(dir / "id3.json"), dir).code == 2);
  }
}

TEST_CASE("replay") {
  const fs::path dir = scratch("replay");
  const fs::path cfg = write_config(dir, R"({"dim": 3, "repetitions": 4, "seed": 2,
    "stopping": {"kind": "fixed-budget", "budgets": [150, 150]}})");
  REQUIRE(run_cli("run --config " + q(cfg) + " --out " + q(dir / "r.csv") + " --trace " + q(dir / "t.ndjson") +
                  " --d-out " + q(dir / "d.json"),
              dir)
              .code == 0);
  const std::string text = slurp(dir / "t.ndjson");
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  REQUIRE(lines.size() == 302);

  SUBCASE("clean") {
    const Outcome o = run_cli("replay --trace " + q(dir / "t.ndjson"), dir);
    CHECK(o.code == 0);
    CHECK(o.out.find("OK 300 iterations") != std::string::npos);
    const nlohmann::json footer = nlohmann::json::parse(lines.back());
    CHECK(footer["d_hash"] == qrl::hash_to_hex(qrl::hash_matrix(qrl::load_matrix_file(dir / "d.json"))));
  }
  SUBCASE("truncated") {
    std::ofstream(dir / "cut.ndjson") << text.substr(0, text.size() / 2);
    CHECK(run_cli("replay --trace " + q(dir / "cut.ndjson"), dir).code == 2);
    CHECK(run_cli("replay --trace " + q(dir / "nowhere.ndjson"), dir).code == 2);
  }
  SUBCASE("tampered angle") {
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
      nlohmann::json j = nlohmann::json::parse(lines[i]);
      if (j["angles"].is_null()) continue;
      j["angles"]["phi_z"] = j["angles"]["phi_z"].get<double>() * 0.5 + 0.01;
      lines[i] = j.dump();
      break;
    }
    std::ofstream out(dir / "bad.ndjson");
    for (const auto& l : lines) out << l << '\n';
    out.close();
    const Outcome o = run_cli("replay --trace " + q(dir / "bad.ndjson"), dir);
    CHECK(o.code == 1);
    CHECK(o.out.find("DIVERGED") != std::string::npos);
  }
}

TEST_CASE("gen-operator") {
  const fs::path dir = scratch("gen");
  CHECK(run_cli("gen-operator --kind random --dim 4 --seed 9 --out " + q(dir / "a.json"), dir).code == 0);
  CHECK(run_cli("gen-operator --kind random --dim 4 --seed 9 --out " + q(dir / "b.json"), dir).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(qrl::load_operator_file(dir / "a.json").dim() == 4);

  REQUIRE(run_cli("gen-operator --kind single-qubit --alpha 0 --beta 0 --lambda0 -1 --lambda1 1 --out " +
                  q(dir / "sq.json"),
              dir)
              .code == 0);
  const qrl::Environment env = qrl::load_operator_file(dir / "sq.json");
  const qrl::ComplexMatrix& o = qrl::env_operator_oracle(env);
  CHECK(o(0, 0).real() == doctest::Approx(-1.0));
  CHECK(o(1, 1).real() == doctest::Approx(1.0));

  CHECK(run_cli("gen-operator --kind random --dim 1 --out " + q(dir / "c.json"), dir).code == 2);
  CHECK(run_cli("gen-operator --kind heisenberg --out " + q(dir / "c.json"), dir).code == 2);
}
