#include "factrank/fact.hpp"

#include <algorithm>

namespace factrank {

Fact Fact::single(const KnowledgeGraph& g, Triple t) {
  auto f = try_make(g, {t});
  if (!f) throw InternalError("Fact::single: object may not be a CVT entity");
  return *f;
}

Fact Fact::through_cvt(const KnowledgeGraph& g, Triple first, Triple second) {
  auto f = try_make(g, {first, second});
  if (!f) throw InternalError("Fact::through_cvt: invalid CVT chain");
  return *f;
}

std::optional<Fact> Fact::try_make(const KnowledgeGraph& g, const std::vector<Triple>& triples) {
  if (triples.size() == 1) {
    const Triple& t = triples[0];
    if (g.is_cvt(t.object)) return std::nullopt;
    if (t.subject == t.object) return std::nullopt;
  } else if (triples.size() == 2) {
    const Triple& a = triples[0];
    const Triple& b = triples[1];
    if (a.object != b.subject) return std::nullopt;
    if (!g.is_cvt(a.object)) return std::nullopt;
    if (g.is_cvt(a.subject) || g.is_cvt(b.object)) return std::nullopt;
    if (a.subject == b.object) return std::nullopt;
  } else {
    return std::nullopt;
  }
  Fact f;
  f.triples_ = triples;
  return f;
}

std::vector<EntityId> Fact::entities() const {
  std::vector<EntityId> out;
  out.push_back(triples_.front().subject);
  if (triples_.size() == 2) out.push_back(triples_[0].object);
  out.push_back(triples_.back().object);
  return out;
}

std::vector<PredicateId> Fact::predicate_seq() const {
  std::vector<PredicateId> out;
  for (const Triple& t : triples_) out.push_back(t.predicate);
  return out;
}

std::string Fact::relationship(const KnowledgeGraph& g) const {
  std::string out;
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    if (i) out.push_back('|');
    out += g.predicate_name(triples_[i].predicate);
  }
  return out;
}

std::string Fact::serialize(const KnowledgeGraph& g) const {
  std::string out = relationship(g);
  out.push_back('\t');
  out += g.entity_name(source());
  if (triples_.size() == 2) {
    out.push_back('\t');
    out += g.entity_name(triples_[0].object);
  }
  out.push_back('\t');
  out += g.entity_name(target());
  return out;
}

Fact parse_fact_fields(const KnowledgeGraph& g, const std::vector<std::string>& fields,
                       std::size_t& pos) {
  if (pos >= fields.size()) throw DataError("fact record: missing predicate field");
  auto preds = split(fields[pos], '|');
  std::size_t want = (preds.size() == 2) ? 3 : 2;
  if (preds.size() != 1 && preds.size() != 2)
    throw DataError("fact record: expected 1 or 2 predicates, got '" + fields[pos] + "'");
  if (fields.size() - pos - 1 < want)
    throw DataError("fact record: truncated entity fields for '" + fields[pos] + "'");

  auto pred = [&](const std::string& name) {
    PredicateId p = g.predicate(name);
    if (p < 0) throw DataError("fact record: unknown predicate '" + name + "'");
    return p;
  };
  EntityId s = g.require_entity(fields[pos + 1]);
  std::optional<Fact> f;
  if (preds.size() == 1) {
    EntityId t = g.require_entity(fields[pos + 2]);
    f = Fact::try_make(g, {Triple{s, pred(preds[0]), t}});
  } else {
    EntityId m = g.require_entity(fields[pos + 2]);
    EntityId t = g.require_entity(fields[pos + 3]);
    f = Fact::try_make(g, {Triple{s, pred(preds[0]), m}, Triple{m, pred(preds[1]), t}});
  }
  if (!f) throw DataError("fact record: ill-formed fact '" + fields[pos] + "'");
  pos += 1 + want;
  return *f;
}

bool is_attribute_of(const KnowledgeGraph& g, const Fact& f_attr, const Fact& f) {
  if (f.size() != 2 || f_attr.size() != 1) return false;
  return f_attr.source() == f.cvt() && g.is_cvt(f_attr.source());
}

std::vector<Fact> direct_facts_between(const KnowledgeGraph& g, EntityId a, EntityId b) {
  check(a != b, "direct_facts_between: endpoints must differ");
  std::vector<Fact> out;

  auto add_single = [&](std::uint32_t ti) {
    const Triple& t = g.triple(ti);
    if (auto f = Fact::try_make(g, {t})) out.push_back(*f);
  };
  for (std::uint32_t ti : g.out_triples(a))
    if (g.triple(ti).object == b) add_single(ti);
  for (std::uint32_t ti : g.out_triples(b))
    if (g.triple(ti).object == a) add_single(ti);

  // 2-triple facts x --p1--> m --p2--> y with {x, y} == {a, b}.
  auto add_cvt_chains = [&](EntityId x, EntityId y) {
    for (std::uint32_t ti : g.out_triples(x)) {
      const Triple& first = g.triple(ti);
      if (!g.is_cvt(first.object)) continue;
      for (std::uint32_t tj : g.out_triples(first.object)) {
        const Triple& second = g.triple(tj);
        if (second.object != y) continue;
        if (auto f = Fact::try_make(g, {first, second})) out.push_back(*f);
      }
    }
  };
  add_cvt_chains(a, b);
  add_cvt_chains(b, a);

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Path::serialize(const KnowledgeGraph& g) const {
  check(entities.size() == steps.size() + 1, "Path: entity/step count mismatch");
  std::string out = g.entity_name(entities[0]);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.push_back('|');
    out += g.predicate_name(steps[i].predicate);
    out.push_back(steps[i].inverse ? '<' : '>');
    out.push_back('|');
    out += g.entity_name(entities[i + 1]);
  }
  return out;
}

Path fact_as_path(const Fact& f) {
  Path p;
  p.entities.push_back(f.triples().front().subject);
  for (const Triple& t : f.triples()) {
    p.steps.push_back(PathStep{t.predicate, false});
    p.entities.push_back(t.object);
  }
  return p;
}

}  // namespace factrank
