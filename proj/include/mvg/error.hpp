/*!
  \file error.hpp
  \brief Error type shared by all mvg modules
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvg
{

enum class errc
{
  cycle_detected,
  arity_mismatch,
  illegal_gate_for_view,
  bad_header,
  latches_unsupported,
  truncated_file,
  bad_token,
  index_out_of_range,
  schema_violation,
  support_too_large,
  length_mismatch,
  missing_template,
  pi_count_mismatch,
  stimulus_mismatch,
  unknown_gate_type,
  empty_input,
  width_mismatch,
  degenerate_pair_set,
  non_finite_loss,
  invalid_argument
};

inline std::string_view errc_name( errc code )
{
  switch ( code )
  {
  case errc::cycle_detected: return "CycleDetected";
  case errc::arity_mismatch: return "ArityMismatch";
  case errc::illegal_gate_for_view: return "IllegalGateForView";
  case errc::bad_header: return "BadHeader";
  case errc::latches_unsupported: return "LatchesUnsupported";
  case errc::truncated_file: return "TruncatedFile";
  case errc::bad_token: return "BadToken";
  case errc::index_out_of_range: return "IndexOutOfRange";
  case errc::schema_violation: return "SchemaViolation";
  case errc::support_too_large: return "SupportTooLarge";
  case errc::length_mismatch: return "LengthMismatch";
  case errc::missing_template: return "MissingTemplate";
  case errc::pi_count_mismatch: return "PiCountMismatch";
  case errc::stimulus_mismatch: return "StimulusMismatch";
  case errc::unknown_gate_type: return "UnknownGateType";
  case errc::empty_input: return "EmptyInput";
  case errc::width_mismatch: return "WidthMismatch";
  case errc::degenerate_pair_set: return "DegeneratePairSet";
  case errc::non_finite_loss: return "NonFiniteLoss";
  case errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/*! \brief Exception carrying a machine-readable error code. */
class error : public std::runtime_error
{
public:
  error( errc code, std::string const& what )
      : std::runtime_error( std::string( errc_name( code ) ) + ": " + what ), code_( code )
  {
  }

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

} // namespace mvg
