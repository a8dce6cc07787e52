#pragma once

#include <stdexcept>
#include <string>

namespace tcs {

// Failure categories. The numeric value doubles as the CLI exit code.
enum class ErrorCategory {
  Config = 2,
  Structural,
  Numerical,
  Usage,
  Data,
  Selection,
  Training,
  Ingestion,
  Io,
  Adjustment,
  DegenerateTreatment,
  UndefinedMetric,
};

const char *category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string &what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

private:
  ErrorCategory category_;
};

#define TCS_DEFINE_ERROR(Name, Category)                                       \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what)                                     \
        : Error(ErrorCategory::Category, what) {}                              \
  }

TCS_DEFINE_ERROR(ConfigError, Config);
TCS_DEFINE_ERROR(StructuralError, Structural);
TCS_DEFINE_ERROR(NumericalError, Numerical);
TCS_DEFINE_ERROR(UsageError, Usage);
TCS_DEFINE_ERROR(DataError, Data);
TCS_DEFINE_ERROR(SelectionError, Selection);
TCS_DEFINE_ERROR(TrainingError, Training);
TCS_DEFINE_ERROR(IngestionError, Ingestion);
TCS_DEFINE_ERROR(IoError, Io);
TCS_DEFINE_ERROR(AdjustmentError, Adjustment);
TCS_DEFINE_ERROR(DegenerateTreatmentError, DegenerateTreatment);
TCS_DEFINE_ERROR(UndefinedMetricError, UndefinedMetric);

#undef TCS_DEFINE_ERROR

} // namespace tcs
