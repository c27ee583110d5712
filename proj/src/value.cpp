#include "idss/value.hpp"

#include <charconv>
#include <stdexcept>

namespace idss {

const char* column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
    case ColumnType::Text: return "text";
    case ColumnType::Timestamp: return "timestamp";
  }
  return "?";
}

ColumnType column_type_from_name(const std::string& name) {
  if (name == "integer") return ColumnType::Integer;
  if (name == "real") return ColumnType::Real;
  if (name == "text") return ColumnType::Text;
  if (name == "timestamp") return ColumnType::Timestamp;
  throw std::invalid_argument("unknown column type: " + name);
}

bool value_conforms(const Value& v, ColumnType t) {
  if (is_null(v)) return true;  // nullability is checked against the schema flag, not here
  switch (t) {
    case ColumnType::Integer:
    case ColumnType::Timestamp:
      return std::holds_alternative<std::int64_t>(v);
    case ColumnType::Real:
      return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    case ColumnType::Text:
      return std::holds_alternative<std::string>(v);
  }
  return false;
}

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

namespace {

Tri from_ordering(int c, CmpOp op) {
  bool r = false;
  switch (op) {
    case CmpOp::Eq: r = c == 0; break;
    case CmpOp::Ne: r = c != 0; break;
    case CmpOp::Lt: r = c < 0; break;
    case CmpOp::Le: r = c <= 0; break;
    case CmpOp::Gt: r = c > 0; break;
    case CmpOp::Ge: r = c >= 0; break;
  }
  return r ? Tri::True : Tri::False;
}

}  // namespace

Tri compare_values(const Value& a, CmpOp op, const Value& b) {
  if (is_null(a) || is_null(b)) return Tri::Unknown;
  bool a_num = !std::holds_alternative<std::string>(a);
  bool b_num = !std::holds_alternative<std::string>(b);
  if (a_num != b_num) return Tri::Unknown;  // text vs number never compares true
  if (!a_num) {
    const auto& sa = std::get<std::string>(a);
    const auto& sb = std::get<std::string>(b);
    int c = sa.compare(sb);
    return from_ordering(c < 0 ? -1 : (c > 0 ? 1 : 0), op);
  }
  // Exact integer comparison when both sides are integers.
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    auto ia = std::get<std::int64_t>(a), ib = std::get<std::int64_t>(b);
    return from_ordering(ia < ib ? -1 : (ia > ib ? 1 : 0), op);
  }
  auto as_double = [](const Value& v) {
    return std::holds_alternative<double>(v) ? std::get<double>(v)
                                             : static_cast<double>(std::get<std::int64_t>(v));
  };
  double da = as_double(a), db = as_double(b);
  return from_ordering(da < db ? -1 : (da > db ? 1 : 0), op);
}

std::string value_to_string(const Value& v) {
  if (is_null(v)) return "NULL";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *d);
    (void)ec;
    std::string s(buf, p);
    // Keep real literals reparsable as reals.
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
      s += ".0";
    }
    return s;
  }
  return std::get<std::string>(v);
}

}  // namespace idss
