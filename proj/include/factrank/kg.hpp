#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factrank/util.hpp"

namespace factrank {

// Dense interned handles. The string id is the canonical external identity;
// handles are only meaningful within one KnowledgeGraph.
using EntityId = std::int32_t;
using PredicateId = std::int32_t;
using TypeId = std::int32_t;

constexpr EntityId kNoEntity = -1;

enum class EntityKind : std::uint8_t { Regular, Cvt, Date, ClassOrType };

struct Triple {
  EntityId subject = kNoEntity;
  PredicateId predicate = -1;
  EntityId object = kNoEntity;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct EntityDecl {
  std::string id;
  EntityKind kind = EntityKind::Regular;
  std::vector<std::string> types;
};

struct TripleDecl {
  std::string subject;
  std::string predicate;
  std::string object;
};

// Reserved type names, given to CVT / date / typeless entities so that the
// type-aggregation encoder is total.
inline constexpr std::string_view kCvtType = "__CVT__";
inline constexpr std::string_view kDateType = "__DATE__";
inline constexpr std::string_view kUnkType = "__UNK__";

// Immutable triple store with subject/object/predicate indices, entity kinds
// and entity types. All query methods are pure reads and safe under
// unrestricted concurrent access.
class KnowledgeGraph {
 public:
  static KnowledgeGraph build(const std::vector<EntityDecl>& entities,
                              const std::vector<TripleDecl>& triples);

  // --- identity ---
  EntityId entity(std::string_view name) const;        // kNoEntity if unknown
  EntityId require_entity(std::string_view name) const;  // DataError if unknown
  PredicateId predicate(std::string_view name) const;  // -1 if unknown
  TypeId type_id(std::string_view name) const;         // -1 if unknown
  const std::string& entity_name(EntityId e) const { return entity_names_.at(static_cast<std::size_t>(e)); }
  const std::string& predicate_name(PredicateId p) const { return predicate_names_.at(static_cast<std::size_t>(p)); }
  const std::string& type_name(TypeId t) const { return type_names_.at(static_cast<std::size_t>(t)); }

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_predicates() const { return predicate_names_.size(); }
  std::size_t num_types() const { return type_names_.size(); }
  std::size_t num_triples() const { return triples_.size(); }

  const std::vector<Triple>& triples() const { return triples_; }
  EntityKind kind(EntityId e) const { return kinds_.at(static_cast<std::size_t>(e)); }
  bool is_cvt(EntityId e) const { return kind(e) == EntityKind::Cvt; }
  bool is_date(EntityId e) const { return kind(e) == EntityKind::Date; }
  bool is_class(EntityId e) const { return kind(e) == EntityKind::ClassOrType; }

  // --- indexed queries; returned spans are indices into triples() ---
  const std::vector<std::uint32_t>& out_triples(EntityId e) const { return out_index_.at(static_cast<std::size_t>(e)); }
  const std::vector<std::uint32_t>& in_triples(EntityId e) const { return in_index_.at(static_cast<std::size_t>(e)); }
  const std::vector<std::uint32_t>& pred_triples(PredicateId p) const;
  const Triple& triple(std::uint32_t i) const { return triples_[i]; }

  // Set-returning operations. Unknown entity/predicate yields the empty set.
  std::vector<Triple> triples_pred(std::string_view pred) const;
  std::vector<Triple> triples_ent(EntityId e) const;
  std::vector<Triple> triples_subj(EntityId e) const;
  std::vector<Triple> triples_obj(EntityId e) const;

  // Declared types of e, plus __CVT__ for CVT entities and __DATE__ for date
  // entities. Typeless entities yield the empty set.
  const std::vector<TypeId>& entity_types(EntityId e) const { return types_.at(static_cast<std::size_t>(e)); }
  std::set<std::string> entity_type_names(EntityId e) const;

  // The k most frequent types of e, ties broken lexicographically ascending.
  std::vector<TypeId> top_k_types(EntityId e, int k) const;

  std::int64_t type_frequency(TypeId t) const { return type_freq_.at(static_cast<std::size_t>(t)); }

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> predicate_names_;
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, EntityId> entity_by_name_;
  std::unordered_map<std::string, PredicateId> predicate_by_name_;
  std::unordered_map<std::string, TypeId> type_by_name_;

  std::vector<Triple> triples_;
  std::vector<EntityKind> kinds_;
  std::vector<std::vector<TypeId>> types_;  // per entity, sorted by type name
  std::vector<std::int64_t> type_freq_;     // entities bearing each type

  std::vector<std::vector<std::uint32_t>> out_index_;  // subject -> triples
  std::vector<std::vector<std::uint32_t>> in_index_;   // object -> triples
  std::vector<std::vector<std::uint32_t>> pred_index_;
  std::vector<std::uint32_t> empty_;
};

// Loads the TSV pair described in the file-format docs:
//   entities: entity_id<TAB>kind<TAB>comma-separated-types
//   triples:  subject<TAB>predicate<TAB>object
// Lines starting with '#' and blank lines are skipped. Errors carry the file
// name and 1-based line number.
KnowledgeGraph load_graph(const std::string& triples_path, const std::string& entities_path);

std::vector<EntityDecl> parse_entities_file(const std::string& path);
std::vector<TripleDecl> parse_triples_file(const std::string& path);

}  // namespace factrank
