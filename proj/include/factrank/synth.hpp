#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factrank/kg.hpp"

namespace factrank {

// Desk-scale generator: a family/company world with people, organizations,
// CVT marriages/employments/awards carrying date attributes, a corpus whose
// sentences co-mention the entities of facts designated contextually
// relevant, and a ground-truth file recording the planted relevance.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::string size = "small";  // small | tiny
};

struct SynthDocument {
  std::string source_entity;
  std::vector<std::vector<std::string>> sentences;
};

// One planted relevance assertion: `fact` should be contextually relevant to
// `query`; the pair (e1, e2) is the co-mention that distant supervision
// should pick it up from.
struct SynthPlant {
  std::string query;  // wire-form fact
  std::string fact;
  std::string e1;
  std::string e2;
  int grade = 1;  // 1 somewhat relevant, 2 very relevant
};

struct SynthWorld {
  std::vector<EntityDecl> entities;
  std::vector<TripleDecl> triples;
  std::vector<SynthDocument> documents;
  std::vector<SynthPlant> plants;
  std::vector<std::string> query_relationships;
};

SynthWorld generate_synthetic_world(const SynthConfig& cfg);

// Writes entities.tsv, triples.tsv, corpus.jsonl, judgments.tsv, plants.tsv
// and query_relationships.txt under dir (created if missing).
void write_synthetic_world(const SynthWorld& world, const std::string& dir);

}  // namespace factrank
