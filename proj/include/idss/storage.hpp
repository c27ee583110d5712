#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "idss/error.hpp"
#include "idss/value.hpp"

namespace idss::storage {

struct Column {
  std::string name;
  ColumnType type = ColumnType::Integer;
  bool nullable = true;

  bool operator==(const Column&) const = default;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;

  bool operator==(const TableSchema&) const = default;
  int column_index(const std::string& column) const;  // -1 when absent
};

using Row = std::vector<Value>;

// Column header of a recordset; nullability is irrelevant for results.
struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Integer;

  bool operator==(const ColumnDef&) const = default;
};

struct Recordset {
  std::vector<ColumnDef> columns;
  std::vector<Row> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  std::string to_csv() const;
};

struct Table {
  TableSchema schema;
  std::vector<Row> rows;
};

// Per-peer relational store over the common schema. Owned by a single peer.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<TableSchema> schemas);

  bool has_table(const std::string& name) const;
  const Table& table(const std::string& name) const;
  Table& table(const std::string& name);
  const std::vector<Table>& tables() const { return tables_; }

  std::size_t insert_rows(const std::string& table, const std::vector<Row>& rows);

  // RFC-4180 CSV with a header row; empty unquoted field = null.
  std::size_t ingest_csv(const std::string& table, std::istream& in);

 private:
  std::vector<Table> tables_;
};

Catalog create_catalog(std::vector<TableSchema> schemas);

std::vector<Row> parse_csv(const TableSchema& schema, std::istream& in);
std::string csv_escape(const std::string& field);

}  // namespace idss::storage
