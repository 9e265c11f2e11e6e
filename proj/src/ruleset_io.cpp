#include <fstream>
#include <set>
#include <sstream>

#include "lingobf/error.hpp"
#include "lingobf/ruleset.hpp"
#include "lingobf/unicode.hpp"

namespace lingobf {
namespace {

using nlohmann::json;

constexpr int kRulesetSchema = 1;

std::string expect_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw ValidationError(where + ": expected a string");
  return unicode::nfc(value.get<std::string>());
}

std::vector<std::string> expect_strings(const json& value, const std::string& where) {
  if (!value.is_array()) throw ValidationError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(expect_string(value[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const json& expect_columns(const json& table, const std::string& where) {
  if (!table.is_object() || !table.contains("columns") || !table["columns"].is_array()) {
    throw ValidationError(where + ": expected an object with a `columns` array");
  }
  return table["columns"];
}

}  // namespace

json to_json(const Ruleset& ruleset) {
  json out;
  out["schema_version"] = kRulesetSchema;
  out["fixed"] = ruleset.fixed;
  out["sets"] = ruleset.sets;
  out["tables"] = json::array();
  for (const auto& table : ruleset.tables) out["tables"].push_back({{"columns", table.columns}});
  out["free_tables"] = json::array();
  for (const auto& table : ruleset.free_tables) {
    json columns = json::array();
    for (const auto& column : table.columns) {
      json entries = json::array();
      for (const auto& cell : column) {
        if (cell.size() == 1) {
          entries.push_back(cell.front());
        } else {
          entries.push_back(cell);
        }
      }
      columns.push_back(std::move(entries));
    }
    out["free_tables"].push_back({{"columns", std::move(columns)}});
  }
  return out;
}

Ruleset ruleset_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("ruleset: expected a JSON object");
  static const std::set<std::string> known = {"schema_version", "name", "notes", "fixed",
                                              "sets",           "tables", "free_tables"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw ValidationError("ruleset: unknown key `" + key + "`");
  }
  if (doc.contains("schema_version") && doc["schema_version"] != kRulesetSchema) {
    throw ValidationError("ruleset: unsupported schema_version " + doc["schema_version"].dump());
  }

  Ruleset ruleset;
  if (doc.contains("fixed")) ruleset.fixed = expect_strings(doc["fixed"], "fixed");

  if (doc.contains("sets")) {
    const auto& sets = doc["sets"];
    if (!sets.is_array()) throw ValidationError("sets: expected an array");
    for (std::size_t s = 0; s < sets.size(); ++s) {
      ruleset.sets.push_back(expect_strings(sets[s], "sets[" + std::to_string(s) + "]"));
    }
  }

  if (doc.contains("tables")) {
    const auto& tables = doc["tables"];
    if (!tables.is_array()) throw ValidationError("tables: expected an array");
    for (std::size_t t = 0; t < tables.size(); ++t) {
      const auto where = "tables[" + std::to_string(t) + "]";
      Table table;
      const auto& columns = expect_columns(tables[t], where);
      for (std::size_t c = 0; c < columns.size(); ++c) {
        table.columns.push_back(
            expect_strings(columns[c], where + ".columns[" + std::to_string(c) + "]"));
      }
      ruleset.tables.push_back(std::move(table));
    }
  }

  if (doc.contains("free_tables")) {
    const auto& tables = doc["free_tables"];
    if (!tables.is_array()) throw ValidationError("free_tables: expected an array");
    for (std::size_t f = 0; f < tables.size(); ++f) {
      const auto where = "free_tables[" + std::to_string(f) + "]";
      FreeTable table;
      const auto& columns = expect_columns(tables[f], where);
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto cwhere = where + ".columns[" + std::to_string(c) + "]";
        if (!columns[c].is_array()) throw ValidationError(cwhere + ": expected an array");
        std::vector<std::vector<Grapheme>> column;
        for (std::size_t r = 0; r < columns[c].size(); ++r) {
          const auto& entry = columns[c][r];
          const auto rwhere = cwhere + "[" + std::to_string(r) + "]";
          if (entry.is_string()) {
            column.push_back({expect_string(entry, rwhere)});
          } else {
            column.push_back(expect_strings(entry, rwhere));
          }
        }
        table.columns.push_back(std::move(column));
      }
      ruleset.free_tables.push_back(std::move(table));
    }
  }
  return ruleset;
}

Ruleset load_ruleset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ruleset file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return ruleset_from_json(doc);
}

json to_json(const PermutationMap& map) {
  json out;
  out["ruleset_id"] = map.ruleset_id();
  out["seed"] = map.seed() ? json(*map.seed()) : json(nullptr);
  out["pairs"] = map.pairs();
  return out;
}

PermutationMap map_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("pairs") || !doc["pairs"].is_object()) {
    throw ValidationError("permutation map: expected an object with `pairs`");
  }
  std::map<Grapheme, Grapheme> pairs;
  for (const auto& [from, to] : doc["pairs"].items()) {
    pairs.emplace(unicode::nfc(from), expect_string(to, "pairs." + from));
  }
  std::optional<std::uint64_t> seed;
  if (doc.contains("seed") && !doc["seed"].is_null()) seed = doc["seed"].get<std::uint64_t>();
  return PermutationMap(std::move(pairs), doc.value("ruleset_id", std::string()), seed);
}

}  // namespace lingobf
