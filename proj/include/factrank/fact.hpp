#pragma once

#include <optional>
#include <string>
#include <vector>

#include "factrank/kg.hpp"

namespace factrank {

// A fact is a path of one triple (object must be non-CVT; the subject may be
// a CVT, which makes it an attribute fact), or of two triples chained through
// a CVT entity with non-CVT endpoints. Its relationship label is the exact
// predicate sequence.
class Fact {
 public:
  static Fact single(const KnowledgeGraph& g, Triple t);
  static Fact through_cvt(const KnowledgeGraph& g, Triple first, Triple second);
  // Validating constructor used by parsers and property tests.
  static std::optional<Fact> try_make(const KnowledgeGraph& g, const std::vector<Triple>& triples);

  const std::vector<Triple>& triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool has_cvt() const { return triples_.size() == 2; }
  bool is_attribute_fact(const KnowledgeGraph& g) const {
    return triples_.size() == 1 && g.is_cvt(triples_[0].subject);
  }
  EntityId cvt() const { return triples_.size() == 2 ? triples_[0].object : kNoEntity; }

  EntityId source() const { return triples_.front().subject; }
  EntityId target() const { return triples_.back().object; }

  // Entities including the CVT when present; predicates as the exact sequence.
  std::vector<EntityId> entities() const;
  std::vector<PredicateId> predicate_seq() const;

  std::string relationship(const KnowledgeGraph& g) const;  // predicates joined by '|'
  // Wire form used in dataset/run/judgment files:
  //   p0[|p1]<TAB>s0<TAB>[cvt<TAB>]t_last
  std::string serialize(const KnowledgeGraph& g) const;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;

 private:
  std::vector<Triple> triples_;
};

// Parses fields[pos...] of a tab-split record as one fact and advances pos.
// The field count is 3 or 4, decided by whether the predicate field holds one
// or two '|'-joined predicates.
Fact parse_fact_fields(const KnowledgeGraph& g, const std::vector<std::string>& fields,
                       std::size_t& pos);

// True iff f_attr is a 1-triple fact whose subject is the CVT of 2-triple f.
bool is_attribute_of(const KnowledgeGraph& g, const Fact& f_attr, const Fact& f);

// All facts whose endpoint pair is exactly {a, b}, in either orientation:
// 1-triple facts and 2-triple facts through any mediating CVT. Requires a != b.
std::vector<Fact> direct_facts_between(const KnowledgeGraph& g, EntityId a, EntityId b);

// A general KG path: entities[0] --preds[0]--> entities[1] ... ; an inverse
// step traverses a triple object -> subject.
struct PathStep {
  PredicateId predicate = -1;
  bool inverse = false;

  friend bool operator==(const PathStep&, const PathStep&) = default;
  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

struct Path {
  std::vector<EntityId> entities;  // steps.size() + 1 entries
  std::vector<PathStep> steps;

  std::string serialize(const KnowledgeGraph& g) const;

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

// The path form of a fact: all-forward steps over its triples.
Path fact_as_path(const Fact& f);

}  // namespace factrank
