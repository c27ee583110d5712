#include "idss/error.hpp"

namespace idss {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DuplicateTable: return "DuplicateTable";
    case Errc::DuplicateColumn: return "DuplicateColumn";
    case Errc::EmptyCatalog: return "EmptyCatalog";
    case Errc::UnknownTable: return "UnknownTable";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnsupportedFeature: return "UnsupportedFeature";
    case Errc::TooDeepNesting: return "TooDeepNesting";
    case Errc::MixedAggregateNesting: return "MixedAggregateNesting";
    case Errc::HeterogeneousSubqueries: return "HeterogeneousSubqueries";
    case Errc::CorrelatedSubquery: return "CorrelatedSubquery";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::SentBackOnInitiator: return "SentBackOnInitiator";
    case Errc::AlreadyMember: return "AlreadyMember";
    case Errc::EmptyRing: return "EmptyRing";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::SignatureMismatch: return "SignatureMismatch";
    case Errc::MissingSubqueryResult: return "MissingSubqueryResult";
    case Errc::InvalidTtl: return "InvalidTtl";
    case Errc::UnknownUqi: return "UnknownUqi";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InvalidPlan: return "InvalidPlan";
  }
  return "UnknownError";
}

}  // namespace idss
