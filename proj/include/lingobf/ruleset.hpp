#pragma once

// Permutation rulesets: which grapheme bijections keep a problem solvable.
//
// A ruleset partitions the graphemes of a problem into a fixed set and three
// kinds of structured collection:
//   - sets: any bijection of the set onto itself is allowed;
//   - tables: equal-length tuples ("columns") are permuted wholesale, keeping
//     each grapheme in its row;
//   - free-tables: columns are permuted, then every cell maps by any bijection
//     onto the same-row cell of the image column.
//
// Two numbers describe a ruleset. count_permutations() counts every
// structure-preserving bijection, identity included. Sampling, however, only
// draws maps whose column/element arrangement is a single full cycle, so no
// grapheme outside the fixed set maps to itself; count_cycle_permutations()
// counts those.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

namespace lingobf {

using Grapheme = std::string;
using BigInt = boost::multiprecision::cpp_int;

struct Table {
  std::vector<std::vector<Grapheme>> columns;

  bool operator==(const Table&) const = default;
};

// columns[c][r] is the cell at row r of column c; a cell holds >= 1 graphemes.
struct FreeTable {
  std::vector<std::vector<std::vector<Grapheme>>> columns;

  bool operator==(const FreeTable&) const = default;
};

struct Ruleset {
  std::vector<std::string> fixed;
  std::vector<std::vector<Grapheme>> sets;
  std::vector<Table> tables;
  std::vector<FreeTable> free_tables;

  // Non-fixed graphemes in declaration order.
  std::vector<Grapheme> inventory() const;

  // Content fingerprint (first 16 hex digits of the SHA-256 of the canonical
  // JSON form).
  std::string id() const;

  bool operator==(const Ruleset&) const = default;
};

struct Violation {
  std::string kind;
  std::string collection;  // e.g. "sets[1]", "tables[0].columns[2]"
  std::string grapheme;    // offending grapheme, empty when not applicable
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  std::vector<std::string> messages() const;
};

ValidationReport validate_ruleset(const Ruleset& ruleset);

// Throws ValidationError listing every violation.
void require_valid(const Ruleset& ruleset);

BigInt count_permutations(const Ruleset& ruleset);

// Number of distinct maps sample_permutation() can produce. Zero when the
// inventory is empty, since the only map is then the identity.
BigInt count_cycle_permutations(const Ruleset& ruleset);

class PermutationMap {
 public:
  PermutationMap() = default;

  // Unchecked construction; use from_pairs() to validate against a ruleset.
  PermutationMap(std::map<Grapheme, Grapheme> pairs, std::string ruleset_id,
                 std::optional<std::uint64_t> seed = std::nullopt)
      : pairs_(std::move(pairs)), ruleset_id_(std::move(ruleset_id)), seed_(seed) {}

  static PermutationMap identity(const Ruleset& ruleset);

  // Throws MapMismatchError unless the pairs form a structure-preserving
  // bijection of the ruleset's inventory.
  static PermutationMap from_pairs(std::map<Grapheme, Grapheme> pairs, const Ruleset& ruleset,
                                   std::optional<std::uint64_t> seed = std::nullopt);

  const std::map<Grapheme, Grapheme>& pairs() const noexcept { return pairs_; }
  const std::string& ruleset_id() const noexcept { return ruleset_id_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  // Image of a grapheme; graphemes outside the domain map to themselves.
  const Grapheme& operator()(const Grapheme& grapheme) const;

  bool is_identity() const;

  // Seeds are provenance, not identity.
  bool operator==(const PermutationMap& other) const {
    return pairs_ == other.pairs_ && ruleset_id_ == other.ruleset_id_;
  }

 private:
  std::map<Grapheme, Grapheme> pairs_;
  std::string ruleset_id_;
  std::optional<std::uint64_t> seed_;
};

struct MapCheckOptions {
  bool require_derangement = false;
};

// Full invariant predicate. Returns one message per failed check.
std::vector<std::string> check_map(const PermutationMap& map, const Ruleset& ruleset,
                                   MapCheckOptions options = {});

// Deterministic in (ruleset, seed). Each set is arranged in one uniformly
// chosen full cycle; each table's columns likewise; each free-table's columns
// are cycled and every source cell gets an independent uniform bijection onto
// the same-row cell of its image column. Collections draw from separate
// streams (see rng.hpp).
PermutationMap sample_permutation(const Ruleset& ruleset, std::uint64_t seed);

// Up to n pairwise-distinct sampled maps. Returns fewer when the ruleset
// admits fewer than n cycle-sampled maps. Attempt a uses the seed
// derive_seed(seed, stream::kDistinctAttempt + a), recorded in the map.
std::vector<PermutationMap> sample_distinct(const Ruleset& ruleset, std::size_t n,
                                            std::uint64_t seed);

// As above, keeping only maps for which `accept` holds. Rejected maps still
// count as seen. Gives up after max(1024, 64 * n) attempts or once every
// cycle-sampled map has been seen, so it may return fewer than n.
std::vector<PermutationMap> sample_distinct(const Ruleset& ruleset, std::size_t n,
                                            std::uint64_t seed,
                                            const std::function<bool(const PermutationMap&)>& accept);

// Throws ValidationError when the map is not a bijection.
PermutationMap invert(const PermutationMap& map);

// (after ∘ before)(g) = after(before(g)). Domains must match.
PermutationMap compose(const PermutationMap& after, const PermutationMap& before);

// JSON forms. Parsing NFC-normalizes every string.
nlohmann::json to_json(const Ruleset& ruleset);
Ruleset ruleset_from_json(const nlohmann::json& doc);
Ruleset load_ruleset(const std::string& path);

nlohmann::json to_json(const PermutationMap& map);
PermutationMap map_from_json(const nlohmann::json& doc);

}  // namespace lingobf
