#include "itas/core/errors.hpp"

namespace itas {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kLabeling: return "labeling";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kData: return "data";
    case ErrorKind::kPool: return "pool";
    case ErrorKind::kCache: return "cache";
    case ErrorKind::kBudget: return "budget";
    case ErrorKind::kLabelSpace: return "label-space";
    case ErrorKind::kModelLabelMismatch: return "model/label mismatch";
    case ErrorKind::kDeterminism: return "determinism";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "I/O";
    case ErrorKind::kPairing: return "pairing";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kFormat:
    case ErrorKind::kLabeling:
    case ErrorKind::kConsistency:
    case ErrorKind::kData:
    case ErrorKind::kPairing:
    case ErrorKind::kLabelSpace:
    case ErrorKind::kModelLabelMismatch:
      return 3;
    case ErrorKind::kBudget:
    case ErrorKind::kPool:
    case ErrorKind::kCache:
      return 4;
    case ErrorKind::kShape:
    case ErrorKind::kDomain:
    case ErrorKind::kDeterminism:
    case ErrorKind::kNumeric:
      return 5;
    case ErrorKind::kIo:
      return 6;
  }
  return 1;
}

}  // namespace itas
