#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ofc {

enum class ErrorCode {
  SyntaxError,
  DuplicateId,
  InvalidModel,
  TooLarge,
  NotASubset,
  NotFound,
  WholeGraph,
  BrokenMapping,
  NotHierarchical,
  InvalidSpec,
  InvalidProfile,
  InvalidConfig,
  MissingSpec,
  NotEnabled,
  AttestationPending,
  NotAwaiting,
  UnknownActor,
  SimulationFailed,
  OverlappingDecisions,
  AlreadyDecided,
  Absorbed,
  OverlapConflict,
  WholeGraphNotConfirmed,
  IoError,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotASubset: return "NotASubset";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::WholeGraph: return "WholeGraph";
    case ErrorCode::BrokenMapping: return "BrokenMapping";
    case ErrorCode::NotHierarchical: return "NotHierarchical";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingSpec: return "MissingSpec";
    case ErrorCode::NotEnabled: return "NotEnabled";
    case ErrorCode::AttestationPending: return "AttestationPending";
    case ErrorCode::NotAwaiting: return "NotAwaiting";
    case ErrorCode::UnknownActor: return "UnknownActor";
    case ErrorCode::SimulationFailed: return "SimulationFailed";
    case ErrorCode::OverlappingDecisions: return "OverlappingDecisions";
    case ErrorCode::AlreadyDecided: return "AlreadyDecided";
    case ErrorCode::Absorbed: return "Absorbed";
    case ErrorCode::OverlapConflict: return "OverlapConflict";
    case ErrorCode::WholeGraphNotConfirmed: return "WholeGraphNotConfirmed";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure surfaced by the library carries a stable code so the CLI and
// the HTTP service can report it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ofc
