#include "idss/storage.hpp"

#include <charconv>
#include <istream>
#include <set>
#include <sstream>

namespace idss::storage {

int TableSchema::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return static_cast<int>(i);
  return -1;
}

int Recordset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string Recordset::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(columns[i].name);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (is_null(row[i])) continue;  // empty field = null
      out += csv_escape(value_to_string(row[i]));
    }
    out += '\n';
  }
  return out;
}

Catalog::Catalog(std::vector<TableSchema> schemas) {
  if (schemas.empty()) fail(Errc::EmptyCatalog, "catalog needs at least one table");
  std::set<std::string> seen;
  for (auto& s : schemas) {
    if (!seen.insert(s.name).second) fail(Errc::DuplicateTable, s.name);
    std::set<std::string> cols;
    for (const auto& c : s.columns)
      if (!cols.insert(c.name).second)
        fail(Errc::DuplicateColumn, s.name + "." + c.name);
    tables_.push_back(Table{std::move(s), {}});
  }
}

Catalog create_catalog(std::vector<TableSchema> schemas) { return Catalog(std::move(schemas)); }

bool Catalog::has_table(const std::string& name) const {
  for (const auto& t : tables_)
    if (t.schema.name == name) return true;
  return false;
}

const Table& Catalog::table(const std::string& name) const {
  for (const auto& t : tables_)
    if (t.schema.name == name) return t;
  fail(Errc::UnknownTable, name);
}

Table& Catalog::table(const std::string& name) {
  for (auto& t : tables_)
    if (t.schema.name == name) return t;
  fail(Errc::UnknownTable, name);
}

std::size_t Catalog::insert_rows(const std::string& table_name, const std::vector<Row>& rows) {
  Table& t = table(table_name);
  const auto& cols = t.schema.columns;
  for (const auto& row : rows) {
    if (row.size() != cols.size())
      fail(Errc::TypeMismatch, table_name + ": row arity " + std::to_string(row.size()) +
                                   " vs " + std::to_string(cols.size()) + " columns");
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (is_null(row[i])) {
        if (!cols[i].nullable)
          fail(Errc::TypeMismatch, table_name + "." + cols[i].name + ": null in non-nullable column");
        continue;
      }
      if (!value_conforms(row[i], cols[i].type))
        fail(Errc::TypeMismatch, table_name + "." + cols[i].name + ": value " +
                                     value_to_string(row[i]) + " is not " +
                                     column_type_name(cols[i].type));
    }
  }
  for (const auto& row : rows) t.rows.push_back(row);
  return rows.size();
}

namespace {

// One CSV record, honoring quoted fields (may span lines). Returns false at EOF.
bool read_record(std::istream& in, std::vector<std::pair<std::string, bool>>& fields) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string cur;
  bool quoted = false, in_quotes = false;
  auto push = [&] {
    fields.emplace_back(std::move(cur), quoted);
    cur.clear();
    quoted = false;
  };
  while (true) {
    if (c == EOF) break;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') { cur += '"'; in.get(); }
        else in_quotes = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      in_quotes = true;
      quoted = true;
    } else if (ch == ',') {
      push();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      cur += ch;
    }
    c = in.get();
  }
  push();
  return true;
}

Value parse_field(const std::string& text, bool quoted, const Column& col) {
  if (text.empty() && !quoted) return Value{};  // empty field = null
  switch (col.type) {
    case ColumnType::Text:
      return text;
    case ColumnType::Integer:
    case ColumnType::Timestamp: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size())
        fail(Errc::TypeMismatch, col.name + ": '" + text + "' is not an integer");
      return v;
    }
    case ColumnType::Real: {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size())
        fail(Errc::TypeMismatch, col.name + ": '" + text + "' is not a real");
      return v;
    }
  }
  return Value{};
}

}  // namespace

std::vector<Row> parse_csv(const TableSchema& schema, std::istream& in) {
  std::vector<std::pair<std::string, bool>> fields;
  if (!read_record(in, fields)) fail(Errc::TypeMismatch, schema.name + ": missing CSV header");
  if (fields.size() != schema.columns.size())
    fail(Errc::TypeMismatch, schema.name + ": header has " + std::to_string(fields.size()) +
                                 " fields, schema has " + std::to_string(schema.columns.size()));
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].first != schema.columns[i].name)
      fail(Errc::TypeMismatch,
           schema.name + ": header column '" + fields[i].first + "' != '" + schema.columns[i].name + "'");

  std::vector<Row> rows;
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].first.empty() && !fields[0].second) continue;  // blank line
    if (fields.size() != schema.columns.size())
      fail(Errc::TypeMismatch, schema.name + ": record arity " + std::to_string(fields.size()));
    Row row;
    for (std::size_t i = 0; i < fields.size(); ++i)
      row.push_back(parse_field(fields[i].first, fields[i].second, schema.columns[i]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t Catalog::ingest_csv(const std::string& table_name, std::istream& in) {
  const Table& t = table(table_name);
  return insert_rows(table_name, parse_csv(t.schema, in));
}

}  // namespace idss::storage
