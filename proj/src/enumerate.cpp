#include "factrank/enumerate.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace factrank {

namespace {

bool triple_in_graph(const KnowledgeGraph& g, const Triple& t) {
  for (std::uint32_t i : g.out_triples(t.subject))
    if (g.triple(i) == t) return true;
  return false;
}

// Sort key per the contract: relationship label, source id, target id, then
// the full wire form to break exact collisions (e.g. two CVTs between the
// same endpoints).
struct FactOrder {
  const KnowledgeGraph& g;
  bool operator()(const Fact& a, const Fact& b) const {
    auto ka = std::make_tuple(a.relationship(g), g.entity_name(a.source()),
                              g.entity_name(a.target()), a.serialize(g));
    auto kb = std::make_tuple(b.relationship(g), g.entity_name(b.source()),
                              g.entity_name(b.target()), b.serialize(g));
    return ka < kb;
  }
};

CandidateSet finalize(const KnowledgeGraph& g, const Fact& query, std::set<Fact>&& facts,
                      const EnumConfig& cfg) {
  facts.erase(query);
  CandidateSet out;
  out.query = query;
  out.candidates.assign(facts.begin(), facts.end());
  std::sort(out.candidates.begin(), out.candidates.end(), FactOrder{g});
  if (cfg.max_candidates > 0 && out.candidates.size() > cfg.max_candidates)
    out.candidates.resize(cfg.max_candidates);
  return out;
}

}  // namespace

std::vector<EntityId> fact_neighbors(const KnowledgeGraph& g, EntityId x) {
  std::set<EntityId> out;
  for (std::uint32_t i : g.out_triples(x)) {
    const Triple& t = g.triple(i);
    if (t.object == x) continue;
    if (!g.is_cvt(t.object)) {
      out.insert(t.object);  // 1-triple fact x -> y
    } else if (!g.is_cvt(x)) {
      // 2-triple facts x -> m -> y
      for (std::uint32_t j : g.out_triples(t.object)) {
        const Triple& u = g.triple(j);
        if (!g.is_cvt(u.object) && u.object != x) out.insert(u.object);
      }
    }
  }
  for (std::uint32_t i : g.in_triples(x)) {
    const Triple& t = g.triple(i);
    if (t.subject == x) continue;
    if (g.is_cvt(x)) continue;  // <y, p, x(cvt)> is not a fact
    out.insert(t.subject);      // 1-triple fact y -> x (y may be a CVT: attribute fact)
    if (g.is_cvt(t.subject)) {
      // 2-triple facts y -> m -> x
      for (std::uint32_t j : g.in_triples(t.subject)) {
        const Triple& u = g.triple(j);
        if (!g.is_cvt(u.subject) && u.subject != x) out.insert(u.subject);
      }
    }
  }
  return std::vector<EntityId>(out.begin(), out.end());
}

std::vector<Fact> attribute_facts_of_cvt(const KnowledgeGraph& g, EntityId m) {
  std::vector<Fact> out;
  for (std::uint32_t i : g.out_triples(m)) {
    if (auto f = Fact::try_make(g, {g.triple(i)})) out.push_back(*f);
  }
  return out;
}

namespace {

// direct facts plus the attribute facts of every CVT mediating one of them.
void collect_facts_between(const KnowledgeGraph& g, EntityId a, EntityId b, std::set<Fact>& sink) {
  for (const Fact& f : direct_facts_between(g, a, b)) {
    if (f.has_cvt()) {
      for (const Fact& attr : attribute_facts_of_cvt(g, f.cvt())) sink.insert(attr);
    }
    sink.insert(f);
  }
}

}  // namespace

CandidateSet enumerate_candidates(const KnowledgeGraph& g, const Fact& query,
                                  const EnumConfig& cfg) {
  for (const Triple& t : query.triples()) {
    if (!triple_in_graph(g, t))
      throw DataError("query fact not present in graph: " + query.serialize(g));
  }

  std::set<Fact> facts;
  EntityId endpoints[2] = {query.source(), query.target()};
  for (EntityId e : endpoints) {
    std::vector<EntityId> level1 = fact_neighbors(g, e);
    for (EntityId n : level1) collect_facts_between(g, e, n, facts);
    for (EntityId n : level1) {
      if (g.is_class(n)) continue;  // class/type neighbors are not expanded
      for (EntityId n2 : fact_neighbors(g, n)) collect_facts_between(g, n, n2, facts);
    }
  }
  return finalize(g, query, std::move(facts), cfg);
}

std::map<EntityId, std::vector<Path>> all_paths_from(const KnowledgeGraph& g, EntityId origin,
                                                     const EnumConfig& cfg, int max_hops) {
  // Per-destination bounded set keyed by serialized path, so the kept paths
  // are the lexicographically smallest ones.
  std::map<EntityId, std::map<std::string, Path>> best;
  auto record = [&](const Path& p) {
    EntityId dest = p.entities.back();
    auto& slot = best[dest];
    std::string key = p.serialize(g);
    if (cfg.max_paths_per_pair == 0) return;
    if (slot.size() < cfg.max_paths_per_pair) {
      slot.emplace(std::move(key), p);
    } else if (key < slot.rbegin()->first) {
      slot.emplace(std::move(key), p);
      slot.erase(std::prev(slot.end()));
    }
  };

  std::set<EntityId> visited{origin};
  Path current;
  current.entities.push_back(origin);

  auto dfs = [&](auto&& self, EntityId at, int hops) -> void {
    int cost = g.is_cvt(at) ? 0 : 1;
    if (hops + cost > max_hops) return;
    auto try_step = [&](EntityId next, PredicateId pred, bool inverse) {
      if (visited.count(next)) return;
      current.steps.push_back(PathStep{pred, inverse});
      current.entities.push_back(next);
      visited.insert(next);
      record(current);
      self(self, next, hops + cost);
      visited.erase(next);
      current.entities.pop_back();
      current.steps.pop_back();
    };
    for (std::uint32_t i : g.out_triples(at)) {
      const Triple& t = g.triple(i);
      try_step(t.object, t.predicate, false);
    }
    for (std::uint32_t i : g.in_triples(at)) {
      const Triple& t = g.triple(i);
      try_step(t.subject, t.predicate, true);
    }
  };
  dfs(dfs, origin, 0);

  std::map<EntityId, std::vector<Path>> out;
  for (auto& [dest, slot] : best) {
    auto& v = out[dest];
    for (auto& [key, p] : slot) v.push_back(std::move(p));
  }
  return out;
}

PathSet connecting_paths(const KnowledgeGraph& g, EntityId origin,
                         const std::vector<EntityId>& destinations, const EnumConfig& cfg) {
  auto indexed = all_paths_from(g, origin, cfg);
  std::set<EntityId> wanted(destinations.begin(), destinations.end());
  wanted.erase(origin);

  PathSet out;
  out.origin = origin;
  for (EntityId dest : wanted) {
    auto it = indexed.find(dest);
    if (it == indexed.end()) continue;
    out.paths.insert(out.paths.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.paths.begin(), out.paths.end(), [&g](const Path& a, const Path& b) {
    return a.serialize(g) < b.serialize(g);
  });
  return out;
}

std::vector<int> cvt_free_distances(const KnowledgeGraph& g, EntityId source, int limit) {
  std::vector<int> dist(g.num_entities(), limit + 1);
  dist[static_cast<std::size_t>(source)] = 0;
  // 0-1 BFS: leaving a CVT is free.
  std::deque<EntityId> queue{source};
  while (!queue.empty()) {
    EntityId at = queue.front();
    queue.pop_front();
    int d = dist[static_cast<std::size_t>(at)];
    int cost = g.is_cvt(at) ? 0 : 1;
    auto relax = [&](EntityId next) {
      if (d + cost >= dist[static_cast<std::size_t>(next)] || d + cost > limit) return;
      dist[static_cast<std::size_t>(next)] = d + cost;
      if (cost == 0)
        queue.push_front(next);
      else
        queue.push_back(next);
    };
    for (std::uint32_t i : g.out_triples(at)) relax(g.triple(i).object);
    for (std::uint32_t i : g.in_triples(at)) relax(g.triple(i).subject);
  }
  return dist;
}

}  // namespace factrank
