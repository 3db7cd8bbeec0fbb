#pragma once

#include <stdexcept>
#include <string>

namespace hspec {

enum class errc {
  unknown_space,
  invalid_params,
  degenerate_commutant,
  not_invariant,
  not_positive_definite,
  dimension_mismatch,
  unsupported_group,
  invalid_label,
  not_scalar,
  singular_gram,
  empty_invariant_space,
  cutoff_exhausted,
  not_invariant_subspace,
  disconnected_graph,
  log_branch_failure,
  not_a_subgroup,
  invalid_config,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::unknown_space: return "UnknownSpace";
    case errc::invalid_params: return "InvalidParams";
    case errc::degenerate_commutant: return "DegenerateCommutant";
    case errc::not_invariant: return "NotInvariant";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::unsupported_group: return "UnsupportedGroup";
    case errc::invalid_label: return "InvalidLabel";
    case errc::not_scalar: return "NotScalar";
    case errc::singular_gram: return "SingularGram";
    case errc::empty_invariant_space: return "EmptyInvariantSpace";
    case errc::cutoff_exhausted: return "CutoffExhausted";
    case errc::not_invariant_subspace: return "NotInvariantSubspace";
    case errc::disconnected_graph: return "DisconnectedGraph";
    case errc::log_branch_failure: return "LogBranchFailure";
    case errc::not_a_subgroup: return "NotASubgroup";
    case errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

// Validation-type failures map to CLI exit code 2, numerical ones to 3.
inline bool is_validation_error(errc c) {
  switch (c) {
    case errc::unknown_space:
    case errc::invalid_params:
    case errc::not_invariant:
    case errc::not_positive_definite:
    case errc::dimension_mismatch:
    case errc::unsupported_group:
    case errc::invalid_label:
    case errc::not_invariant_subspace:
    case errc::not_a_subgroup:
    case errc::invalid_config:
      return true;
    default:
      return false;
  }
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace hspec
