#include "qrl/trace.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "qrl/error.hpp"

namespace qrl {

using nlohmann::json;

namespace {

json w_max_to_json(double w_max) {
  if (std::isinf(w_max)) return nullptr;
  return w_max;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::TraceError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::TraceError, std::string("bad field '") + key + "': " + e.what());
  }
}

json parse_line(const std::string& line, std::uint64_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(Errc::TraceError, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

std::uint64_t hash_matrix(const ComplexMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Complex& x : m.data()) {
    for (double part : {x.real(), x.imag()}) {
      const auto bits = std::bit_cast<std::uint64_t>(part);
      for (int byte = 0; byte < 8; ++byte) {
        h ^= (bits >> (8 * byte)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

std::string hash_to_hex(std::uint64_t hash) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

json record_to_json(const IterationRecord& record) {
  json j;
  j["type"] = "iteration";
  j["k"] = record.k;
  j["stage"] = record.stage;
  j["m"] = record.outcome_m;
  j["class"] = std::string(to_string(record.classification));
  if (record.angles) {
    j["angles"] = {{"phi_x", record.angles->phi_x},
                   {"phi_y", record.angles->phi_y},
                   {"phi_z", record.angles->phi_z}};
  } else {
    j["angles"] = nullptr;
  }
  j["w_after"] = record.w_after;
  return j;
}

IterationRecord record_from_json(const json& j) {
  IterationRecord rec;
  rec.k = field<std::uint64_t>(j, "k");
  rec.stage = field<std::size_t>(j, "stage");
  rec.outcome_m = field<std::size_t>(j, "m");
  const auto cls = outcome_from_string(field<std::string>(j, "class"));
  if (!cls) throw Error(Errc::TraceError, "unknown class at k=" + std::to_string(rec.k));
  rec.classification = *cls;
  if (!j.contains("angles")) throw Error(Errc::TraceError, "missing field 'angles'");
  if (!j["angles"].is_null()) {
    const json& a = j["angles"];
    rec.angles = RotationAngles{field<double>(a, "phi_x"), field<double>(a, "phi_y"),
                                field<double>(a, "phi_z")};
  }
  rec.w_after = field<double>(j, "w_after");
  return rec;
}

TraceWriter::TraceWriter(std::ostream& out, std::size_t dim, const RewardParams& params,
                         std::uint64_t seed)
    : out_(&out) {
  const json header = {{"type", "header"}, {"dim", dim},
                       {"r", params.r},    {"nu", params.nu},
                       {"w1", params.w1},  {"w_max", w_max_to_json(params.w_max)},
                       {"seed", seed}};
  *out_ << header.dump() << '\n';
}

void TraceWriter::write(const IterationRecord& record) {
  *out_ << record_to_json(record).dump() << '\n';
  ++count_;
}

void TraceWriter::finish(const AgentState& agent) {
  const json footer = {{"type", "footer"},
                       {"iterations", count_},
                       {"d_hash", hash_to_hex(hash_matrix(agent.d_matrix))}};
  *out_ << footer.dump() << '\n';
  out_->flush();
}

ReplayResult replay_trace(std::istream& in) {
  std::string line;
  std::uint64_t line_no = 0;

  auto next = [&]() -> std::optional<json> {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) return parse_line(line, line_no);
    }
    return std::nullopt;
  };

  const auto header = next();
  if (!header || field<std::string>(*header, "type") != "header") {
    throw Error(Errc::TraceError, "trace does not start with a header");
  }
  RewardParams params;
  params.r = field<double>(*header, "r");
  params.nu = field<double>(*header, "nu");
  params.w1 = field<double>(*header, "w1");
  params.w_max = header->contains("w_max") && (*header)["w_max"].is_null()
                     ? kUnbounded
                     : field<double>(*header, "w_max");
  AgentState agent;
  try {
    agent = protocol_init(field<std::size_t>(*header, "dim"), params,
                          field<std::uint64_t>(*header, "seed"));
  } catch (const Error& e) {
    throw Error(Errc::TraceError, std::string("bad header: ") + e.what());
  }

  ReplayResult result;
  while (true) {
    const auto entry = next();
    if (!entry) throw Error(Errc::TraceError, "trace ends without a footer (truncated)");
    const std::string type = field<std::string>(*entry, "type");
    if (type == "footer") {
      const auto recorded = field<std::uint64_t>(*entry, "iterations");
      result.expected_hash = field<std::string>(*entry, "d_hash");
      result.actual_hash = hash_to_hex(hash_matrix(agent.d_matrix));
      if (recorded != result.iterations) {
        throw Error(Errc::TraceError, "footer counts " + std::to_string(recorded) +
                                          " iterations, trace holds " +
                                          std::to_string(result.iterations));
      }
      if (result.detail.empty() && result.expected_hash != result.actual_hash) {
        result.detail = "final D hash differs";
      }
      result.matched = result.detail.empty();
      return result;
    }
    if (type != "iteration") throw Error(Errc::TraceError, "unknown entry type '" + type + "'");
    const IterationRecord recorded = record_from_json(*entry);
    const IterationRecord recomputed = apply_record(agent, recorded);
    ++result.iterations;
    if (result.detail.empty() && recomputed.w_after != recorded.w_after) {
      result.detail = "w_after diverges at k=" + std::to_string(recorded.k);
    }
  }
}

}  // namespace qrl
