#include "factrank/kg.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace factrank {

namespace {

EntityKind parse_kind(std::string_view s, const std::string& where) {
  if (s == "regular") return EntityKind::Regular;
  if (s == "cvt") return EntityKind::Cvt;
  if (s == "date") return EntityKind::Date;
  if (s == "class") return EntityKind::ClassOrType;
  throw DataError(where + ": unknown entity kind '" + std::string(s) +
                  "' (expected regular|cvt|date|class)");
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(const std::vector<EntityDecl>& entities,
                                     const std::vector<TripleDecl>& triples) {
  KnowledgeGraph g;

  auto intern_type = [&g](const std::string& name) -> TypeId {
    auto it = g.type_by_name_.find(name);
    if (it != g.type_by_name_.end()) return it->second;
    TypeId id = static_cast<TypeId>(g.type_names_.size());
    g.type_names_.push_back(name);
    g.type_by_name_.emplace(name, id);
    g.type_freq_.push_back(0);
    return id;
  };

  for (const auto& decl : entities) {
    if (decl.id.empty()) throw DataError("entity with empty id");
    if (g.entity_by_name_.count(decl.id))
      throw DataError("duplicate entity declaration '" + decl.id + "'");
    EntityId e = static_cast<EntityId>(g.entity_names_.size());
    g.entity_names_.push_back(decl.id);
    g.entity_by_name_.emplace(decl.id, e);
    g.kinds_.push_back(decl.kind);

    std::set<std::string> names(decl.types.begin(), decl.types.end());
    names.erase("");
    if (decl.kind == EntityKind::Cvt) names.insert(std::string(kCvtType));
    if (decl.kind == EntityKind::Date) names.insert(std::string(kDateType));
    std::vector<TypeId> tids;
    tids.reserve(names.size());
    for (const auto& n : names) {
      TypeId t = intern_type(n);
      g.type_freq_[static_cast<std::size_t>(t)] += 1;
      tids.push_back(t);
    }
    g.types_.push_back(std::move(tids));
  }

  g.out_index_.resize(g.entity_names_.size());
  g.in_index_.resize(g.entity_names_.size());

  std::set<Triple> seen;
  for (const auto& decl : triples) {
    auto lookup = [&g](const std::string& name) -> EntityId {
      auto it = g.entity_by_name_.find(name);
      if (it == g.entity_by_name_.end())
        throw DataError("triple references undeclared entity '" + name + "'");
      return it->second;
    };
    Triple t;
    t.subject = lookup(decl.subject);
    t.object = lookup(decl.object);
    if (decl.predicate.empty()) throw DataError("triple with empty predicate");
    auto it = g.predicate_by_name_.find(decl.predicate);
    if (it == g.predicate_by_name_.end()) {
      t.predicate = static_cast<PredicateId>(g.predicate_names_.size());
      g.predicate_names_.push_back(decl.predicate);
      g.predicate_by_name_.emplace(decl.predicate, t.predicate);
      g.pred_index_.emplace_back();
    } else {
      t.predicate = it->second;
    }
    if (!seen.insert(t).second)
      throw DataError("duplicate triple <" + decl.subject + ", " + decl.predicate + ", " +
                      decl.object + ">");
    std::uint32_t idx = static_cast<std::uint32_t>(g.triples_.size());
    g.triples_.push_back(t);
    g.out_index_[static_cast<std::size_t>(t.subject)].push_back(idx);
    g.in_index_[static_cast<std::size_t>(t.object)].push_back(idx);
    g.pred_index_[static_cast<std::size_t>(t.predicate)].push_back(idx);
  }
  return g;
}

EntityId KnowledgeGraph::entity(std::string_view name) const {
  auto it = entity_by_name_.find(std::string(name));
  return it == entity_by_name_.end() ? kNoEntity : it->second;
}

EntityId KnowledgeGraph::require_entity(std::string_view name) const {
  EntityId e = entity(name);
  if (e == kNoEntity) throw DataError("unknown entity '" + std::string(name) + "'");
  return e;
}

PredicateId KnowledgeGraph::predicate(std::string_view name) const {
  auto it = predicate_by_name_.find(std::string(name));
  return it == predicate_by_name_.end() ? -1 : it->second;
}

TypeId KnowledgeGraph::type_id(std::string_view name) const {
  auto it = type_by_name_.find(std::string(name));
  return it == type_by_name_.end() ? -1 : it->second;
}

const std::vector<std::uint32_t>& KnowledgeGraph::pred_triples(PredicateId p) const {
  if (p < 0 || static_cast<std::size_t>(p) >= pred_index_.size()) return empty_;
  return pred_index_[static_cast<std::size_t>(p)];
}

std::vector<Triple> KnowledgeGraph::triples_pred(std::string_view pred) const {
  std::vector<Triple> out;
  PredicateId p = predicate(pred);
  if (p < 0) return out;
  for (std::uint32_t i : pred_index_[static_cast<std::size_t>(p)]) out.push_back(triples_[i]);
  return out;
}

std::vector<Triple> KnowledgeGraph::triples_ent(EntityId e) const {
  std::vector<Triple> out = triples_subj(e);
  for (std::uint32_t i : in_index_.at(static_cast<std::size_t>(e))) {
    if (triples_[i].subject != e) out.push_back(triples_[i]);  // self loops counted once
  }
  return out;
}

std::vector<Triple> KnowledgeGraph::triples_subj(EntityId e) const {
  std::vector<Triple> out;
  for (std::uint32_t i : out_index_.at(static_cast<std::size_t>(e))) out.push_back(triples_[i]);
  return out;
}

std::vector<Triple> KnowledgeGraph::triples_obj(EntityId e) const {
  std::vector<Triple> out;
  for (std::uint32_t i : in_index_.at(static_cast<std::size_t>(e))) out.push_back(triples_[i]);
  return out;
}

std::set<std::string> KnowledgeGraph::entity_type_names(EntityId e) const {
  std::set<std::string> out;
  for (TypeId t : entity_types(e)) out.insert(type_name(t));
  return out;
}

std::vector<TypeId> KnowledgeGraph::top_k_types(EntityId e, int k) const {
  check(k >= 1, "top_k_types: k must be >= 1");
  std::vector<TypeId> ts = entity_types(e);
  std::sort(ts.begin(), ts.end(), [this](TypeId a, TypeId b) {
    std::int64_t fa = type_frequency(a), fb = type_frequency(b);
    if (fa != fb) return fa > fb;
    return type_name(a) < type_name(b);
  });
  if (ts.size() > static_cast<std::size_t>(k)) ts.resize(static_cast<std::size_t>(k));
  return ts;
}

namespace {

// Shared line reader: skips blank and '#' lines, reports 1-based line numbers.
template <typename Fn>
void for_each_data_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(line, lineno);
  }
}

}  // namespace

std::vector<EntityDecl> parse_entities_file(const std::string& path) {
  std::vector<EntityDecl> out;
  for_each_data_line(path, [&](const std::string& line, std::size_t lineno) {
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    EntityDecl d;
    d.id = fields[0];
    if (d.id.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": empty entity id");
    d.kind = parse_kind(fields[1], path + ":" + std::to_string(lineno));
    if (!fields[2].empty()) d.types = split(fields[2], ',');
    out.push_back(std::move(d));
  });
  return out;
}

std::vector<TripleDecl> parse_triples_file(const std::string& path) {
  std::vector<TripleDecl> out;
  for_each_data_line(path, [&](const std::string& line, std::size_t lineno) {
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty field in triple");
    out.push_back(TripleDecl{fields[0], fields[1], fields[2]});
  });
  return out;
}

KnowledgeGraph load_graph(const std::string& triples_path, const std::string& entities_path) {
  return KnowledgeGraph::build(parse_entities_file(entities_path), parse_triples_file(triples_path));
}

}  // namespace factrank
