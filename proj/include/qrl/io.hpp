#pragma once

// JSON files for operators and learned matrices.
//   operator: {"dim": n, "tau": t, "entries_re": [[..]], "entries_im": [[..]]}
//   matrix:   {"dim": n, "entries_re": [[..]], "entries_im": [[..]]}
// Entries are row-major.

#include <filesystem>

#include <nlohmann/json.hpp>

#include "qrl/environment.hpp"
#include "qrl/linalg.hpp"

namespace qrl {

nlohmann::json matrix_to_json(const ComplexMatrix& m);
/// ConfigError on a malformed document.
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json operator_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

/// IoError when the file cannot be read or is not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

Environment load_operator_file(const std::filesystem::path& path);
void save_operator_file(const std::filesystem::path& path, const Environment& env);
ComplexMatrix load_matrix_file(const std::filesystem::path& path);
void save_matrix_file(const std::filesystem::path& path, const ComplexMatrix& m);

}  // namespace qrl
