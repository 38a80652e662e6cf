#include "qrl/io.hpp"

#include <fstream>

#include "qrl/error.hpp"

namespace qrl {

using nlohmann::json;

namespace {

std::vector<std::vector<double>> rows_of(const json& j, const char* key, std::size_t dim) {
  if (!j.contains(key)) throw Error(Errc::ConfigError, std::string("missing '") + key + "'");
  std::vector<std::vector<double>> rows;
  try {
    rows = j.at(key).get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("'") + key + "' is not a numeric matrix: " + e.what());
  }
  if (rows.size() != dim) throw Error(Errc::ConfigError, std::string("'") + key + "' row count");
  for (const auto& row : rows)
    if (row.size() != dim) throw Error(Errc::ConfigError, std::string("'") + key + "' row length");
  return rows;
}

std::size_t dim_of(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_unsigned()) {
    throw Error(Errc::ConfigError, "missing or invalid 'dim'");
  }
  return j["dim"].get<std::size_t>();
}

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<std::vector<double>> re(n, std::vector<double>(n));
  std::vector<std::vector<double>> im(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      re[i][k] = m(i, k).real();
      im[i][k] = m(i, k).imag();
    }
  return {{"dim", n}, {"entries_re", re}, {"entries_im", im}};
}

ComplexMatrix matrix_from_json(const json& j) {
  const std::size_t n = dim_of(j);
  const auto re = rows_of(j, "entries_re", n);
  const auto im = rows_of(j, "entries_im", n);
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) m(i, k) = Complex(re[i][k], im[i][k]);
  return m;
}

json operator_to_json(const Environment& env) {
  json j = matrix_to_json(env_operator_oracle(env));
  j["tau"] = env.tau();
  return j;
}

Environment environment_from_json(const json& j) {
  const ComplexMatrix o = matrix_from_json(j);
  if (!j.contains("tau") || !j["tau"].is_number()) {
    throw Error(Errc::ConfigError, "missing or invalid 'tau'");
  }
  try {
    return env_explicit(o, j["tau"].get<double>());
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::IoError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Environment load_operator_file(const std::filesystem::path& path) {
  return environment_from_json(read_json_file(path));
}

void save_operator_file(const std::filesystem::path& path, const Environment& env) {
  write_json_file(path, operator_to_json(env));
}

ComplexMatrix load_matrix_file(const std::filesystem::path& path) {
  return matrix_from_json(read_json_file(path));
}

void save_matrix_file(const std::filesystem::path& path, const ComplexMatrix& m) {
  write_json_file(path, matrix_to_json(m));
}

}  // namespace qrl
