#include "lingobf/ruleset.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "lingobf/digest.hpp"
#include "lingobf/error.hpp"
#include "lingobf/rng.hpp"
#include "lingobf/unicode.hpp"

namespace lingobf {
namespace {

BigInt factorial(std::size_t n) {
  BigInt out = 1;
  for (std::size_t i = 2; i <= n; ++i) out *= i;
  return out;
}

std::string label(const char* kind, std::size_t index) {
  return std::string(kind) + "[" + std::to_string(index) + "]";
}

bool has_marker_char(const std::string& text) {
  return text.find_first_of("@$&") != std::string::npos;
}

std::set<Grapheme> as_set(const std::vector<Grapheme>& items) {
  return {items.begin(), items.end()};
}

}  // namespace

std::vector<Grapheme> Ruleset::inventory() const {
  std::vector<Grapheme> out;
  for (const auto& set : sets) out.insert(out.end(), set.begin(), set.end());
  for (const auto& table : tables) {
    for (const auto& column : table.columns) out.insert(out.end(), column.begin(), column.end());
  }
  for (const auto& table : free_tables) {
    for (const auto& column : table.columns) {
      for (const auto& cell : column) out.insert(out.end(), cell.begin(), cell.end());
    }
  }
  return out;
}

std::string Ruleset::id() const { return sha256_hex(to_json(*this).dump()).substr(0, 16); }

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  out.reserve(violations.size());
  for (const auto& v : violations) out.push_back(v.collection + ": " + v.message);
  return out;
}

ValidationReport validate_ruleset(const Ruleset& ruleset) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string collection, std::string grapheme,
                 std::string message) {
    report.violations.push_back(
        {std::move(kind), std::move(collection), std::move(grapheme), std::move(message)});
  };

  std::set<std::string> seen;
  auto check_string = [&](const std::string& text, const std::string& where) {
    if (text.empty()) {
      add("empty_grapheme", where, text, "empty grapheme");
      return;
    }
    if (has_marker_char(text)) {
      add("marker_character", where, text, "annotation marker character in " + text);
    }
    if (!unicode::is_nfc(text)) {
      add("not_normalized", where, text, "grapheme " + text + " is not in NFC form");
    }
    if (!seen.insert(text).second) {
      add("duplicate_grapheme", where, text, "duplicate grapheme " + text);
    }
  };

  for (const auto& text : ruleset.fixed) check_string(text, "fixed");

  for (std::size_t s = 0; s < ruleset.sets.size(); ++s) {
    const auto& set = ruleset.sets[s];
    const auto where = label("sets", s);
    for (const auto& g : set) check_string(g, where);
    if (set.size() < 2) {
      add("set_too_small", where, set.empty() ? "" : set.front(),
          "set of size " + std::to_string(set.size()));
    }
  }

  for (std::size_t t = 0; t < ruleset.tables.size(); ++t) {
    const auto& table = ruleset.tables[t];
    const auto where = label("tables", t);
    if (table.columns.size() < 2) {
      add("table_too_few_columns", where, "",
          "table with " + std::to_string(table.columns.size()) + " column(s)");
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& column = table.columns[c];
      const auto cwhere = where + ".columns[" + std::to_string(c) + "]";
      for (const auto& g : column) check_string(g, cwhere);
      if (column.empty()) add("empty_column", cwhere, "", "empty column");
      if (column.size() != table.columns.front().size()) {
        add("ragged_table", cwhere, "",
            "column has " + std::to_string(column.size()) + " rows, expected " +
                std::to_string(table.columns.front().size()));
      }
    }
  }

  for (std::size_t f = 0; f < ruleset.free_tables.size(); ++f) {
    const auto& table = ruleset.free_tables[f];
    const auto where = label("free_tables", f);
    if (table.columns.size() < 2) {
      add("table_too_few_columns", where, "",
          "free-table with " + std::to_string(table.columns.size()) + " column(s)");
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& column = table.columns[c];
      const auto cwhere = where + ".columns[" + std::to_string(c) + "]";
      if (column.empty()) add("empty_column", cwhere, "", "empty column");
      if (column.size() != table.columns.front().size()) {
        add("ragged_table", cwhere, "",
            "column has " + std::to_string(column.size()) + " rows, expected " +
                std::to_string(table.columns.front().size()));
        continue;
      }
      for (std::size_t r = 0; r < column.size(); ++r) {
        const auto& cell = column[r];
        const auto rwhere = cwhere + "[" + std::to_string(r) + "]";
        for (const auto& g : cell) check_string(g, rwhere);
        if (cell.empty()) add("empty_cell", rwhere, "", "empty cell");
        if (cell.size() != table.columns.front()[r].size()) {
          add("cell_size_mismatch", rwhere, cell.empty() ? "" : cell.front(),
              "cell has " + std::to_string(cell.size()) + " graphemes, row " + std::to_string(r) +
                  " of column 0 has " + std::to_string(table.columns.front()[r].size()));
        }
      }
    }
  }
  return report;
}

void require_valid(const Ruleset& ruleset) {
  const auto report = validate_ruleset(ruleset);
  if (!report.valid()) {
    throw ValidationError("invalid ruleset (" + std::to_string(report.violations.size()) +
                              " violation(s))",
                          report.messages());
  }
}

BigInt count_permutations(const Ruleset& ruleset) {
  require_valid(ruleset);
  BigInt total = 1;
  for (const auto& set : ruleset.sets) total *= factorial(set.size());
  for (const auto& table : ruleset.tables) total *= factorial(table.columns.size());
  for (const auto& table : ruleset.free_tables) {
    total *= factorial(table.columns.size());
    for (const auto& column : table.columns) {
      for (const auto& cell : column) total *= factorial(cell.size());
    }
  }
  return total;
}

BigInt count_cycle_permutations(const Ruleset& ruleset) {
  require_valid(ruleset);
  if (ruleset.inventory().empty()) return 0;
  BigInt total = 1;
  for (const auto& set : ruleset.sets) total *= factorial(set.size() - 1);
  for (const auto& table : ruleset.tables) total *= factorial(table.columns.size() - 1);
  for (const auto& table : ruleset.free_tables) {
    total *= factorial(table.columns.size() - 1);
    for (const auto& column : table.columns) {
      for (const auto& cell : column) total *= factorial(cell.size());
    }
  }
  return total;
}

PermutationMap PermutationMap::identity(const Ruleset& ruleset) {
  std::map<Grapheme, Grapheme> pairs;
  for (const auto& g : ruleset.inventory()) pairs.emplace(g, g);
  return PermutationMap(std::move(pairs), ruleset.id());
}

PermutationMap PermutationMap::from_pairs(std::map<Grapheme, Grapheme> pairs,
                                          const Ruleset& ruleset,
                                          std::optional<std::uint64_t> seed) {
  PermutationMap map(std::move(pairs), ruleset.id(), seed);
  const auto problems = check_map(map, ruleset);
  if (!problems.empty()) {
    std::string message = "map is not valid for ruleset " + ruleset.id() + ":";
    for (const auto& p : problems) message += " " + p + ";";
    throw MapMismatchError(message);
  }
  return map;
}

const Grapheme& PermutationMap::operator()(const Grapheme& grapheme) const {
  const auto it = pairs_.find(grapheme);
  return it == pairs_.end() ? grapheme : it->second;
}

bool PermutationMap::is_identity() const {
  return std::all_of(pairs_.begin(), pairs_.end(),
                     [](const auto& kv) { return kv.first == kv.second; });
}

std::vector<std::string> check_map(const PermutationMap& map, const Ruleset& ruleset,
                                   MapCheckOptions options) {
  std::vector<std::string> problems;
  if (!map.ruleset_id().empty() && map.ruleset_id() != ruleset.id()) {
    problems.push_back("ruleset id " + map.ruleset_id() + " does not match " + ruleset.id());
  }

  const auto inventory = ruleset.inventory();
  const std::set<Grapheme> domain_expected(inventory.begin(), inventory.end());
  std::set<Grapheme> domain;
  std::set<Grapheme> image;
  for (const auto& [from, to] : map.pairs()) {
    domain.insert(from);
    image.insert(to);
  }
  if (domain != domain_expected) {
    problems.push_back("domain differs from the ruleset inventory");
    return problems;
  }
  if (image != domain || image.size() != map.pairs().size()) {
    problems.push_back("not a bijection of the inventory");
    return problems;
  }
  for (const auto& fixed : ruleset.fixed) {
    if (map.pairs().contains(fixed)) problems.push_back("fixed string " + fixed + " is mapped");
  }

  for (std::size_t s = 0; s < ruleset.sets.size(); ++s) {
    const auto members = as_set(ruleset.sets[s]);
    for (const auto& g : ruleset.sets[s]) {
      if (!members.contains(map(g))) {
        problems.push_back("sets[" + std::to_string(s) + "]: " + g + " leaves its set");
      }
    }
  }

  for (std::size_t t = 0; t < ruleset.tables.size(); ++t) {
    const auto& columns = ruleset.tables[t].columns;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::vector<Grapheme> imaged;
      for (const auto& g : columns[c]) imaged.push_back(map(g));
      if (std::find(columns.begin(), columns.end(), imaged) == columns.end()) {
        problems.push_back("tables[" + std::to_string(t) + "]: column " + std::to_string(c) +
                           " does not map onto a column row-for-row");
      }
    }
  }

  for (std::size_t f = 0; f < ruleset.free_tables.size(); ++f) {
    const auto& columns = ruleset.free_tables[f].columns;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::vector<std::set<Grapheme>> imaged;
      for (const auto& cell : columns[c]) {
        std::set<Grapheme> out;
        for (const auto& g : cell) out.insert(map(g));
        imaged.push_back(std::move(out));
      }
      const bool matches_some_column =
          std::any_of(columns.begin(), columns.end(), [&](const auto& candidate) {
            if (candidate.size() != imaged.size()) return false;
            for (std::size_t r = 0; r < candidate.size(); ++r) {
              if (as_set(candidate[r]) != imaged[r]) return false;
            }
            return true;
          });
      if (!matches_some_column) {
        problems.push_back("free_tables[" + std::to_string(f) + "]: column " + std::to_string(c) +
                           " does not map cell-for-cell onto a column");
      }
    }
  }

  if (options.require_derangement) {
    for (const auto& [from, to] : map.pairs()) {
      if (from == to) problems.push_back("fixed point " + from + " outside the fixed set");
    }
  }
  return problems;
}

PermutationMap sample_permutation(const Ruleset& ruleset, std::uint64_t seed) {
  require_valid(ruleset);
  std::map<Grapheme, Grapheme> pairs;

  auto cycled_indices = [](Rng& rng, std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.cycle(std::span<std::size_t>(idx));
    return idx;
  };

  for (std::size_t s = 0; s < ruleset.sets.size(); ++s) {
    const auto& set = ruleset.sets[s];
    Rng rng(derive_seed(seed, stream::kSets + s));
    const auto idx = cycled_indices(rng, set.size());
    for (std::size_t k = 0; k < set.size(); ++k) pairs.emplace(set[k], set[idx[k]]);
  }

  for (std::size_t t = 0; t < ruleset.tables.size(); ++t) {
    const auto& columns = ruleset.tables[t].columns;
    Rng rng(derive_seed(seed, stream::kTables + t));
    const auto idx = cycled_indices(rng, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      for (std::size_t r = 0; r < columns[c].size(); ++r) {
        pairs.emplace(columns[c][r], columns[idx[c]][r]);
      }
    }
  }

  for (std::size_t f = 0; f < ruleset.free_tables.size(); ++f) {
    const auto& columns = ruleset.free_tables[f].columns;
    Rng rng(derive_seed(seed, stream::kFreeTables + f));
    const auto idx = cycled_indices(rng, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      for (std::size_t r = 0; r < columns[c].size(); ++r) {
        auto target = columns[idx[c]][r];
        rng.shuffle(std::span<Grapheme>(target));
        const auto& source = columns[c][r];
        for (std::size_t e = 0; e < source.size(); ++e) pairs.emplace(source[e], target[e]);
      }
    }
  }

  return PermutationMap(std::move(pairs), ruleset.id(), seed);
}

std::vector<PermutationMap> sample_distinct(const Ruleset& ruleset, std::size_t n,
                                            std::uint64_t seed) {
  const BigInt available = count_cycle_permutations(ruleset);
  const std::size_t target =
      available < n ? static_cast<std::size_t>(available) : n;

  std::vector<PermutationMap> out;
  std::set<std::map<Grapheme, Grapheme>> seen;
  for (std::uint64_t attempt = 0; out.size() < target; ++attempt) {
    auto map = sample_permutation(ruleset, derive_seed(seed, stream::kDistinctAttempt + attempt));
    if (seen.insert(map.pairs()).second) out.push_back(std::move(map));
  }
  return out;
}

std::vector<PermutationMap> sample_distinct(
    const Ruleset& ruleset, std::size_t n, std::uint64_t seed,
    const std::function<bool(const PermutationMap&)>& accept) {
  const BigInt available = count_cycle_permutations(ruleset);
  const std::size_t target = available < n ? static_cast<std::size_t>(available) : n;
  const std::uint64_t max_attempts = std::max<std::uint64_t>(1024, 64 * std::uint64_t{n});

  std::vector<PermutationMap> out;
  std::set<std::map<Grapheme, Grapheme>> seen;
  for (std::uint64_t attempt = 0; out.size() < target && attempt < max_attempts; ++attempt) {
    if (BigInt(seen.size()) == available) break;
    auto map = sample_permutation(ruleset, derive_seed(seed, stream::kDistinctAttempt + attempt));
    if (!seen.insert(map.pairs()).second) continue;
    if (accept(map)) out.push_back(std::move(map));
  }
  return out;
}

PermutationMap invert(const PermutationMap& map) {
  std::map<Grapheme, Grapheme> inverse;
  std::vector<std::string> problems;
  for (const auto& [from, to] : map.pairs()) {
    if (!inverse.emplace(to, from).second) problems.push_back("two graphemes map to " + to);
  }
  for (const auto& [to, from] : inverse) {
    if (!map.pairs().contains(to)) problems.push_back(to + " is an image but not in the domain");
  }
  if (!problems.empty()) throw ValidationError("cannot invert a non-bijective map", problems);
  return PermutationMap(std::move(inverse), map.ruleset_id());
}

PermutationMap compose(const PermutationMap& after, const PermutationMap& before) {
  std::map<Grapheme, Grapheme> pairs;
  for (const auto& [from, to] : before.pairs()) {
    if (!after.pairs().contains(to)) {
      throw MapMismatchError("cannot compose: " + to + " is outside the outer map's domain");
    }
    pairs.emplace(from, after(to));
  }
  return PermutationMap(std::move(pairs), before.ruleset_id());
}

}  // namespace lingobf
