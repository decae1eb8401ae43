#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here recomputes results from first principles (linear scans, full
// materialization, Floyd-Warshall) so the indexed implementations are checked
// against a second route.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "factrank/enumerate.hpp"
#include "factrank/fact.hpp"
#include "factrank/kg.hpp"

namespace factrank::testing {

inline KnowledgeGraph toy_kg() {
  std::vector<EntityDecl> entities{
      {"BillGates", EntityKind::Regular, {"person", "founder"}},
      {"PaulAllen", EntityKind::Regular, {"person", "founder"}},
      {"MelindaGates", EntityKind::Regular, {"person"}},
      {"JenniferGates", EntityKind::Regular, {"person"}},
      {"MSFT", EntityKind::Regular, {"company", "organization"}},
      {"M1", EntityKind::Cvt, {}},
      {"D1994", EntityKind::Date, {}},
      {"D1975", EntityKind::Date, {}},
  };
  std::vector<TripleDecl> triples{
      {"BillGates", "founderOf", "MSFT"},   {"PaulAllen", "founderOf", "MSFT"},
      {"BillGates", "marriage", "M1"},      {"M1", "spouse", "MelindaGates"},
      {"M1", "marriageDate", "D1994"},      {"MSFT", "foundedIn", "D1975"},
      {"BillGates", "parentOf", "JenniferGates"},
  };
  return KnowledgeGraph::build(entities, triples);
}

inline Triple triple_of(const KnowledgeGraph& g, const std::string& s, const std::string& p,
                        const std::string& o) {
  return Triple{g.require_entity(s), g.predicate(p), g.require_entity(o)};
}

inline Fact fact1(const KnowledgeGraph& g, const std::string& s, const std::string& p,
                  const std::string& o) {
  return Fact::single(g, triple_of(g, s, p, o));
}

inline Fact fact2(const KnowledgeGraph& g, const std::string& s, const std::string& p0,
                  const std::string& m, const std::string& p1, const std::string& o) {
  return Fact::through_cvt(g, triple_of(g, s, p0, m), triple_of(g, m, p1, o));
}

// ---------------------------------------------------------------------------
// Random graphs for property tests.
// ---------------------------------------------------------------------------

struct RandomGraphSpec {
  std::size_t max_entities = 40;
  std::size_t max_triples = 200;
  std::size_t predicates = 10;
  std::size_t type_pool = 8;
};

inline KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphSpec& spec = {}) {
  std::size_t n = 6 + uniform_below(rng, spec.max_entities - 5);
  std::vector<EntityDecl> entities;
  for (std::size_t i = 0; i < n; ++i) {
    EntityDecl d;
    d.id = "e" + std::to_string(i);
    double roll = uniform_unit(rng);
    d.kind = roll < 0.62   ? EntityKind::Regular
             : roll < 0.80 ? EntityKind::Cvt
             : roll < 0.92 ? EntityKind::Date
                           : EntityKind::ClassOrType;
    std::size_t n_types = uniform_below(rng, 4);
    std::set<std::string> ts;
    for (std::size_t k = 0; k < n_types; ++k)
      ts.insert("t" + std::to_string(uniform_below(rng, spec.type_pool)));
    d.types.assign(ts.begin(), ts.end());
    entities.push_back(std::move(d));
  }

  std::size_t m = 1 + uniform_below(rng, spec.max_triples);
  std::set<std::string> seen;
  std::vector<TripleDecl> triples;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t s = uniform_below(rng, n);
    std::size_t o = uniform_below(rng, n);
    if (s == o) continue;
    std::string p = "p" + std::to_string(uniform_below(rng, spec.predicates));
    std::string key = std::to_string(s) + "|" + p + "|" + std::to_string(o);
    if (!seen.insert(key).second) continue;
    triples.push_back(TripleDecl{"e" + std::to_string(s), p, "e" + std::to_string(o)});
  }
  return KnowledgeGraph::build(entities, triples);
}

// Every fact in the graph, by full scans.
inline std::vector<Fact> materialize_all_facts(const KnowledgeGraph& g) {
  std::vector<Fact> all;
  for (const Triple& t : g.triples())
    if (auto f = Fact::try_make(g, {t})) all.push_back(*f);
  for (const Triple& first : g.triples()) {
    if (!g.is_cvt(first.object)) continue;
    for (const Triple& second : g.triples()) {
      if (second.subject != first.object) continue;
      if (auto f = Fact::try_make(g, {first, second})) all.push_back(*f);
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

// Quadratic-scan oracle for direct_facts_between.
inline std::vector<Fact> oracle_facts_between(const KnowledgeGraph& g, EntityId a, EntityId b) {
  std::vector<Fact> out;
  for (const Fact& f : materialize_all_facts(g)) {
    EntityId s = f.source(), t = f.target();
    if ((s == a && t == b) || (s == b && t == a)) out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formula oracles (Table-style statistics recomputed by linear scan).
// ---------------------------------------------------------------------------

inline std::vector<Triple> scan_pred(const KnowledgeGraph& g, PredicateId p) {
  std::vector<Triple> out;
  for (const Triple& t : g.triples())
    if (t.predicate == p) out.push_back(t);
  return out;
}

inline std::vector<Triple> scan_ent(const KnowledgeGraph& g, EntityId e) {
  std::vector<Triple> out;
  for (const Triple& t : g.triples())
    if (t.subject == e || t.object == e) out.push_back(t);
  return out;
}

inline std::vector<Triple> scan_subj(const KnowledgeGraph& g, EntityId e) {
  std::vector<Triple> out;
  for (const Triple& t : g.triples())
    if (t.subject == e) out.push_back(t);
  return out;
}

inline std::vector<Triple> scan_obj(const KnowledgeGraph& g, EntityId e) {
  std::vector<Triple> out;
  for (const Triple& t : g.triples())
    if (t.object == e) out.push_back(t);
  return out;
}

inline double oracle_pred_freq(const KnowledgeGraph& g, PredicateId p) {
  return static_cast<double>(scan_pred(g, p).size()) / static_cast<double>(g.num_triples());
}

inline double oracle_ent_freq(const KnowledgeGraph& g, EntityId e) {
  return static_cast<double>(scan_ent(g, e).size()) / static_cast<double>(g.num_triples());
}

inline double oracle_itf(const KnowledgeGraph& g, PredicateId p) {
  return std::log(static_cast<double>(g.num_triples()) /
                  static_cast<double>(scan_pred(g, p).size()));
}

inline double oracle_pf_out(const KnowledgeGraph& g, PredicateId p, EntityId e) {
  auto subj = scan_subj(g, e);
  if (subj.empty()) return 0.0;
  double hit = 0;
  for (const Triple& t : subj)
    if (t.predicate == p) hit += 1;
  return hit / static_cast<double>(subj.size());
}

inline double oracle_pf_in(const KnowledgeGraph& g, PredicateId p, EntityId e) {
  auto obj = scan_obj(g, e);
  if (obj.empty()) return 0.0;
  double hit = 0;
  for (const Triple& t : obj)
    if (t.predicate == p) hit += 1;
  return hit / static_cast<double>(obj.size());
}

inline double oracle_informativeness(const KnowledgeGraph& g, const Fact& f) {
  double acc = 0.0;
  for (const Triple& t : f.triples()) {
    acc += oracle_pf_out(g, t.predicate, t.subject) * oracle_itf(g, t.predicate);
    acc += oracle_pf_in(g, t.predicate, t.object) * oracle_itf(g, t.predicate);
  }
  return acc / (2.0 * static_cast<double>(f.size()));
}

inline double oracle_type_jaccard(const KnowledgeGraph& g, EntityId a, EntityId b) {
  std::set<std::string> ta = g.entity_type_names(a);
  std::set<std::string> tb = g.entity_type_names(b);
  if (ta.empty() && tb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : ta) inter += tb.count(t);
  return static_cast<double>(inter) / static_cast<double>(ta.size() + tb.size() - inter);
}

inline double oracle_pred_coocc(const KnowledgeGraph& g, PredicateId p1, PredicateId p2) {
  auto ents = [&g](PredicateId p) {
    std::set<EntityId> out;
    for (const Triple& t : scan_pred(g, p)) {
      out.insert(t.subject);
      out.insert(t.object);
    }
    return out;
  };
  std::set<EntityId> a = ents(p1), b = ents(p2);
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (EntityId e : a) inter += b.count(e);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// All-pairs shortest paths on the undirected view (CVTs are ordinary nodes).
inline std::vector<std::vector<int>> oracle_all_distances(const KnowledgeGraph& g) {
  const int inf = 1 << 20;
  std::size_t n = g.num_entities();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const Triple& t : g.triples()) {
    auto s = static_cast<std::size_t>(t.subject);
    auto o = static_cast<std::size_t>(t.object);
    d[s][o] = 1;
    d[o][s] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] >= inf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

// The 2-hop materializer: filters the full fact list by the hop rule with the
// three exceptions (CVTs uncounted, class neighbors not expanded, query
// excluded), then attaches CVT attribute payloads.
inline std::vector<Fact> oracle_enumerate(const KnowledgeGraph& g, const Fact& query) {
  std::vector<Fact> all = materialize_all_facts(g);

  std::map<EntityId, std::set<EntityId>> fact_adjacent;
  for (const Fact& f : all) {
    fact_adjacent[f.source()].insert(f.target());
    fact_adjacent[f.target()].insert(f.source());
  }

  std::set<EntityId> expandable;
  for (EntityId e : {query.source(), query.target()}) {
    for (EntityId n : fact_adjacent[e])
      if (!g.is_class(n)) expandable.insert(n);
  }

  std::set<Fact> admitted;
  for (const Fact& f : all) {
    bool touches_endpoint = f.source() == query.source() || f.target() == query.source() ||
                            f.source() == query.target() || f.target() == query.target();
    bool touches_neighbor = expandable.count(f.source()) || expandable.count(f.target());
    if (touches_endpoint || touches_neighbor) admitted.insert(f);
  }
  std::set<Fact> result = admitted;
  for (const Fact& f : admitted) {
    if (!f.has_cvt()) continue;
    for (const Fact& a : all)
      if (a.size() == 1 && a.source() == f.cvt()) result.insert(a);
  }
  result.erase(query);
  return {result.begin(), result.end()};
}

inline std::set<std::string> fact_set_strings(const KnowledgeGraph& g, const std::vector<Fact>& fs) {
  std::set<std::string> out;
  for (const Fact& f : fs) out.insert(f.serialize(g));
  return out;
}

// A query fact sampled from the materialized fact list, if any exists.
inline std::optional<Fact> sample_fact(const KnowledgeGraph& g, std::mt19937_64& rng) {
  auto all = materialize_all_facts(g);
  if (all.empty()) return std::nullopt;
  return all[static_cast<std::size_t>(uniform_below(rng, all.size()))];
}

}  // namespace factrank::testing
