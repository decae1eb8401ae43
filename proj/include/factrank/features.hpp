#pragma once

#include <map>
#include <string>
#include <vector>

#include "factrank/fact.hpp"

namespace factrank {

// Global graph statistics backing the feature formulas: triple count,
// per-predicate triple counts and unique-entity sets, per-entity triple
// counts. Exactly reproducible from the graph.
struct GraphStats {
  std::int64_t num_triples = 0;
  std::vector<std::int64_t> pred_count;                 // per predicate
  std::vector<std::vector<EntityId>> pred_entities;     // per predicate, sorted unique
  std::vector<std::int64_t> ent_triple_count;           // triples having the entity
  std::vector<std::int64_t> subj_count;                 // out-degree
  std::vector<std::int64_t> obj_count;                  // in-degree

  static GraphStats compute(const KnowledgeGraph& g);
};

// --- formula primitives (Table-style global statistics) ---

double pred_freq(const GraphStats& stats, PredicateId p);
double ent_freq(const GraphStats& stats, EntityId e);
double inverse_triple_freq(const GraphStats& stats, PredicateId p);   // ln(N / |TriplesPred(p)|)
double pf_out(const KnowledgeGraph& g, PredicateId p, EntityId e);    // 0 when e has no out-triples
double pf_in(const KnowledgeGraph& g, PredicateId p, EntityId e);     // 0 when e has no in-triples
double informativeness(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f);

double ent_type_sim(const KnowledgeGraph& g, EntityId e1, EntityId e2);
double pred_coocc_sim(const GraphStats& stats, PredicateId p1, PredicateId p2);
double pred_set_jaccard(const Fact& f_q, const Fact& f_c);

// Shortest-path length in the undirected view of the graph, CVTs counted as
// nodes. Values above d_max and unreachable pairs both map to d_max + 1.
int entity_distance(const KnowledgeGraph& g, EntityId e1, EntityId e2, int d_max);

// BFS distances from one source, capped at d_max (d_max + 1 beyond); reused
// across the candidates of one query fact.
std::vector<int> bfs_distances(const KnowledgeGraph& g, EntityId source, int d_max);

struct DistanceCache {
  int d_max = 4;
  std::map<EntityId, std::vector<int>> by_source;
  const std::vector<int>& get(const KnowledgeGraph& g, EntityId source);
};

// --- the assembled vector ---

struct FeatureSlot {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

struct FeatureLayout {
  std::vector<FeatureSlot> slots;
  std::size_t length = 0;
  std::vector<std::string> rel_vocab;  // sorted; fit on the training split

  static FeatureLayout make(const std::vector<std::string>& rel_vocab);
  std::string to_json() const;
};

constexpr std::size_t kBaseFeatureCount = 33;
constexpr int kDefaultDistanceCap = 4;

// Fixed-layout feature vector for a (query, candidate) pair; length is
// kBaseFeatureCount + |rel_vocab|. Pure: identical inputs yield bit-identical
// vectors.
std::vector<double> extract_features(const KnowledgeGraph& g, const GraphStats& stats,
                                     const Fact& f_q, const Fact& f_c,
                                     const FeatureLayout& layout, DistanceCache& dcache);

}  // namespace factrank
