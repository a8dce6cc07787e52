#include "tcs/error.hpp"

namespace tcs {

const char *category_name(ErrorCategory category) noexcept {
  switch (category) {
  case ErrorCategory::Config: return "configuration";
  case ErrorCategory::Structural: return "structural";
  case ErrorCategory::Numerical: return "numerical";
  case ErrorCategory::Usage: return "usage";
  case ErrorCategory::Data: return "data";
  case ErrorCategory::Selection: return "selection";
  case ErrorCategory::Training: return "training";
  case ErrorCategory::Ingestion: return "ingestion";
  case ErrorCategory::Io: return "io";
  case ErrorCategory::Adjustment: return "adjustment";
  case ErrorCategory::DegenerateTreatment: return "degenerate-treatment";
  case ErrorCategory::UndefinedMetric: return "undefined-metric";
  }
  return "unknown";
}

} // namespace tcs
