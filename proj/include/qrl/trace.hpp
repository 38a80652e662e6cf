#pragma once

// Newline-delimited JSON trace of one agent's run:
//   {"type":"header", "dim", "r", "nu", "w1", "w_max", "seed"}
//   {"type":"iteration", "k", "stage", "m", "class", "angles", "w_after"}   (one per iteration)
//   {"type":"footer", "iterations", "d_hash"}
// Replaying re-applies the recorded outcomes and angles and compares the hash
// of the reconstructed D with the footer.

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "qrl/protocol.hpp"

namespace qrl {

/// FNV-1a 64 over the raw bytes of the entries, row-major.
std::uint64_t hash_matrix(const ComplexMatrix& m);
std::string hash_to_hex(std::uint64_t hash);

nlohmann::json record_to_json(const IterationRecord& record);
/// Throws TraceError on missing or mistyped fields.
IterationRecord record_from_json(const nlohmann::json& j);

class TraceWriter {
 public:
  TraceWriter(std::ostream& out, std::size_t dim, const RewardParams& params, std::uint64_t seed);

  void write(const IterationRecord& record);
  void finish(const AgentState& agent);

 private:
  std::ostream* out_;
  std::uint64_t count_ = 0;
};

struct ReplayResult {
  bool matched = false;
  std::uint64_t iterations = 0;
  std::string expected_hash;
  std::string actual_hash;
  std::string detail;  // first divergence, empty on a match
};

/// Throws TraceError when the trace is malformed or truncated; divergence
/// between recorded and recomputed values is reported through the result.
ReplayResult replay_trace(std::istream& in);

}  // namespace qrl
