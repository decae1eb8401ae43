#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "factrank/fact.hpp"

namespace factrank {

struct EnumConfig {
  std::size_t max_candidates = 0;     // 0 = unlimited
  std::size_t max_paths_per_pair = 25;
};

struct CandidateSet {
  Fact query;
  std::vector<Fact> candidates;  // unique, deterministically ordered
};

struct PathSet {
  EntityId origin = kNoEntity;
  std::vector<Path> paths;
};

// Entities connected to x by at least one fact (1-triple, or 2-triple through
// a CVT). This is the neighbor relation of the hop rule: crossing a CVT chain
// is a single hop.
std::vector<EntityId> fact_neighbors(const KnowledgeGraph& g, EntityId x);

// 1-triple facts whose subject is the CVT m.
std::vector<Fact> attribute_facts_of_cvt(const KnowledgeGraph& g, EntityId m);

// Candidate facts at most 2 hops from either endpoint of the query fact.
// CVT entities do not count as hops; neighbors of class/type kind are not
// expanded further; the query fact itself is excluded. Candidates connecting
// a pair through a CVT bring along that CVT's attribute facts. The result is
// sorted by (relationship label, source id, target id) and truncated to
// cfg.max_candidates when set.
CandidateSet enumerate_candidates(const KnowledgeGraph& g, const Fact& query,
                                  const EnumConfig& cfg);

// All simple paths (no repeated entity) of at most `max_hops` hops from
// origin, grouped by terminal entity, each group capped at
// cfg.max_paths_per_pair by lexicographic selection on the serialized path.
// Steps leaving a CVT are free, matching the hop rule above.
std::map<EntityId, std::vector<Path>> all_paths_from(const KnowledgeGraph& g, EntityId origin,
                                                     const EnumConfig& cfg, int max_hops = 2);

// Paths from origin to any of the destination entities (which may include
// CVTs), in deterministic order.
PathSet connecting_paths(const KnowledgeGraph& g, EntityId origin,
                         const std::vector<EntityId>& destinations, const EnumConfig& cfg);

// Undirected BFS distance treating CVT entities as free transit nodes; used
// by the hop-rule sanity property.
std::vector<int> cvt_free_distances(const KnowledgeGraph& g, EntityId source, int limit);

}  // namespace factrank
