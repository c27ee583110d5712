#pragma once

#include <stdexcept>
#include <string>

namespace idss {

enum class Errc {
  DuplicateTable,
  DuplicateColumn,
  EmptyCatalog,
  UnknownTable,
  UnknownColumn,
  TypeMismatch,
  SyntaxError,
  UnsupportedFeature,
  TooDeepNesting,
  MixedAggregateNesting,
  HeterogeneousSubqueries,
  CorrelatedSubquery,
  IllegalTransition,
  SentBackOnInitiator,
  AlreadyMember,
  EmptyRing,
  SchemaMismatch,
  SignatureMismatch,
  MissingSubqueryResult,
  InvalidTtl,
  UnknownUqi,
  ConfigError,
  InvalidPlan,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace idss
