#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace idss {

enum class ColumnType { Integer, Real, Text, Timestamp };

const char* column_type_name(ColumnType t);
ColumnType column_type_from_name(const std::string& name);

// Scalar cell value. monostate is SQL NULL; timestamps are integer milliseconds.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

bool value_conforms(const Value& v, ColumnType t);

// Three-valued logic for predicates over possibly-null values.
enum class Tri { False, True, Unknown };

inline Tri tri_not(Tri t) {
  if (t == Tri::Unknown) return Tri::Unknown;
  return t == Tri::True ? Tri::False : Tri::True;
}
inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::True;
}
inline Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::False;
}

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
const char* cmp_symbol(CmpOp op);

// SQL comparison: any null operand (or a text/number type cross) yields Unknown.
Tri compare_values(const Value& a, CmpOp op, const Value& b);

// Canonical text rendering: integers plain, reals shortest round-trip, NULL for null.
std::string value_to_string(const Value& v);

}  // namespace idss
