#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpr {

enum class ErrorKind {
  NonSymmetric,
  NonPhysical,
  DimensionMismatch,
  UnsupportedState,
  CutoffTooSmall,
  NonPhysicalChannel,
  ConventionUnresolved,
  DomainError,
  BadMagic,
  TruncatedPayload,
  DimensionOverflow,
  EmptyTrainingSet,
  EmptyEvaluationSet,
  InsufficientSamples,
  SingularDesign,
  ShapeMismatch,
  NonFiniteLoss,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure carries a machine-readable kind so
/// the CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedState: return "UnsupportedState";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::NonPhysicalChannel: return "NonPhysicalChannel";
    case ErrorKind::ConventionUnresolved: return "ConventionUnresolved";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyEvaluationSet: return "EmptyEvaluationSet";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tpr
