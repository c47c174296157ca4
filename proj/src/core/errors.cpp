#include "stpp/errors.hpp"

namespace stpp {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "config";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::EmptyPattern: return "empty-pattern";
    case ErrorCode::DegenerateStatistic: return "degenerate-statistic";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace stpp
