#include "qrl/error.hpp"

namespace qrl {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BadIndices: return "BadIndices";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::BadDim: return "BadDim";
    case Errc::StageOverflow: return "StageOverflow";
    case Errc::AngleDomain: return "AngleDomain";
    case Errc::ModeMismatch: return "ModeMismatch";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::TraceError: return "TraceError";
  }
  return "Unknown";
}

}  // namespace qrl
