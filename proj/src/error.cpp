#include "insightspec/error.hpp"

namespace insightspec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyHeader: return "EmptyHeader";
    case ErrorCode::UnknownVerb: return "UnknownVerb";
    case ErrorCode::MalformedExpr: return "MalformedExpr";
    case ErrorCode::RankOutsideOrderedContext: return "RankOutsideOrderedContext";
    case ErrorCode::UnresolvedSource: return "UnresolvedSource";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::EvaluationError: return "EvaluationError";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::TypeConstraintViolation: return "TypeConstraintViolation";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::UnseenCategory: return "UnseenCategory";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::MetricKindMismatch: return "MetricKindMismatch";
    case ErrorCode::EmptyEvaluationSet: return "EmptyEvaluationSet";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ReservedName: return "ReservedName";
    case ErrorCode::CycleWouldForm: return "CycleWouldForm";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::UndeclaredMetadataKey: return "UndeclaredMetadataKey";
    case ErrorCode::NoEvidence: return "NoEvidence";
    case ErrorCode::SelfLink: return "SelfLink";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ObjectiveNotObjective: return "ObjectiveNotObjective";
    case ErrorCode::InsightIsObjective: return "InsightIsObjective";
    case ErrorCode::BrokenReference: return "BrokenReference";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnknownKind: return "UnknownKind";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    const std::string& location) {
  std::string out(to_string(code));
  if (!location.empty()) out += " at " + location;
  out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::string location,
             std::vector<std::string> details)
    : std::runtime_error(compose(code, message, location)),
      code_(code),
      message_(std::move(message)),
      location_(std::move(location)),
      details_(std::move(details)) {}

Error Error::at(std::string location) const {
  return Error(code_, message_, std::move(location), details_);
}

Error Error::with_code(ErrorCode code) const {
  return Error(code, message_, location_, details_);
}

}  // namespace insightspec
