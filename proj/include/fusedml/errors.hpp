#pragma once

#include <stdexcept>
#include <string>

namespace fusedml {

enum class ErrorKind {
  bad_input,
  non_binary_indicator,
  non_finite_value,
  empty_cell,
  propensity_out_of_range,
  degenerate_design,
  insufficient_data,
  dimension_mismatch,
  cell_too_small,
  empty_training_cell,
  missing_nuisance,
  zero_variance,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::bad_input: return "BadInput";
    case ErrorKind::non_binary_indicator: return "NonBinaryIndicator";
    case ErrorKind::non_finite_value: return "NonFiniteValue";
    case ErrorKind::empty_cell: return "EmptyCell";
    case ErrorKind::propensity_out_of_range: return "PropensityOutOfRange";
    case ErrorKind::degenerate_design: return "DegenerateDesign";
    case ErrorKind::insufficient_data: return "InsufficientData";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::cell_too_small: return "CellTooSmall";
    case ErrorKind::empty_training_cell: return "EmptyTrainingCell";
    case ErrorKind::missing_nuisance: return "MissingNuisance";
    case ErrorKind::zero_variance: return "ZeroVariance";
  }
  return "Unknown";
}

/// Input errors come from malformed data or configuration; everything else
/// surfaces while computing. The CLI maps the two groups to exit codes 2 and 3.
inline bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::bad_input:
    case ErrorKind::non_binary_indicator:
    case ErrorKind::non_finite_value:
    case ErrorKind::empty_cell:
    case ErrorKind::propensity_out_of_range:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }
  bool input_error() const { return is_input_error(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace fusedml
