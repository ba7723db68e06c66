#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace insightspec {

enum class ErrorCode {
  // dataset
  ParseError,
  SchemaMismatch,
  EmptyHeader,
  // transform
  UnknownVerb,
  MalformedExpr,
  RankOutsideOrderedContext,
  UnresolvedSource,
  TypeError,
  EvaluationError,
  UnknownColumn,
  // relationship
  EmptyTrainingSet,
  TypeConstraintViolation,
  DegenerateData,
  UntrainedModel,
  UnseenCategory,
  MissingInput,
  MetricKindMismatch,
  EmptyEvaluationSet,
  // knowledge graph / insight-task
  DuplicateName,
  ReservedName,
  CycleWouldForm,
  UnknownConcept,
  UndeclaredMetadataKey,
  NoEvidence,
  SelfLink,
  UnknownNode,
  UnresolvedReference,
  KindMismatch,
  ObjectiveNotObjective,
  InsightIsObjective,
  // persistence
  BrokenReference,
  FormatError,
  UnknownKind,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Typed failure raised by every fallible operation in the library.
///
/// `location` is a JSON pointer, a row/line reference or empty. `details`
/// carries the individual violations when an operation accumulates several
/// (transformation building does).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string location = {},
        std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

  /// Same error relocated; used when a nested decoder failure bubbles up.
  Error at(std::string location) const;
  Error with_code(ErrorCode code) const;

 private:
  ErrorCode code_;
  std::string message_;
  std::string location_;
  std::vector<std::string> details_;
};

}  // namespace insightspec
