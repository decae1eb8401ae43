#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "factrank/enumerate.hpp"

namespace factrank {

// Entity-tagged corpus abstracting the article of a source entity: each
// document is a list of sentences, each sentence an ordered list of entity
// mentions.
struct Document {
  EntityId source_entity = kNoEntity;
  std::vector<std::vector<EntityId>> sentences;
};

struct Corpus {
  std::vector<Document> documents;
  std::map<EntityId, std::size_t> by_source;

  const Document* document_for(EntityId e) const {
    auto it = by_source.find(e);
    return it == by_source.end() ? nullptr : &documents[it->second];
  }
};

struct CorpusLoadReport {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t unknown_entity_refs = 0;  // mentions or sources missing from the graph
};

// JSON Lines, one document per line:
//   {"source_entity": id, "sentences": [[entity ids], ...]}
// Unknown entities are dropped and counted in the report. Documents sharing a
// source entity are merged in file order.
Corpus load_corpus(const KnowledgeGraph& g, const std::string& path, CorpusLoadReport* report);

enum class Split : std::uint8_t { Train, Validation, Test };

std::string split_name(Split s);
Split parse_split(const std::string& s);

struct LabeledInstance {
  Fact query;
  Fact candidate;
  int label = 0;  // {0, 1}
  Split split = Split::Train;
};

struct LabelConfig {
  std::size_t max_cooccurring = 20;  // |O| cap per sentence
};

struct LabelResult {
  std::vector<Fact> relevant;         // within the candidate set, sorted
  std::size_t outside_candidates = 0; // relevant facts not in the candidate set
  std::size_t ambiguous_pairs = 0;    // pairs skipped for having several connecting facts
};

// Noisy relevance labels for one query fact r<s, t>: scan the sentences of
// s's document that mention t; for every unordered pair drawn from the first
// max_cooccurring other entities plus {s, t}, a pair connected by exactly one
// fact marks that fact relevant; pairs with several connecting facts are
// skipped. The result is intersected with the candidate set.
LabelResult label_query_fact(const KnowledgeGraph& g, const Corpus& corpus, const Fact& f_q,
                             const CandidateSet& candidates, const LabelConfig& cfg);

struct SplitStats {
  std::size_t query_facts = 0;
  double cand_avg = 0.0;
  double cand_median = 0.0;
  std::size_t cand_max = 0;
  std::size_t cand_min = 0;
};

struct DatasetStats {
  std::map<std::string, std::size_t> queries_per_relationship;
  std::map<std::string, SplitStats> per_split;  // keyed by split name
  std::size_t total_instances = 0;
  std::size_t positive_instances = 0;
  double positive_rate = 0.0;
  std::size_t relevant_outside_candidates = 0;
  std::size_t ambiguous_pairs = 0;

  std::string to_json() const;
};

struct DatasetConfig {
  std::size_t max_queries_per_relationship = 2000;
  std::uint64_t seed = 0;
  LabelConfig label;
  EnumConfig enumeration;
  int threads = 1;
};

struct Dataset {
  std::vector<LabeledInstance> instances;
  DatasetStats stats;
};

// Builds the labeled dataset for the given relationship labels: enumerate the
// query facts of each relationship, label them, keep queries with at least
// one relevant candidate, sample up to max_queries_per_relationship with the
// seed, and split 70/10/20 per relationship (floor/floor/remainder).
Dataset build_dataset(const KnowledgeGraph& g, const Corpus& corpus,
                      const std::vector<std::string>& relationships, const DatasetConfig& cfg);

// All facts in the graph whose relationship label matches, in deterministic
// order.
std::vector<Fact> facts_of_relationship(const KnowledgeGraph& g, const std::string& relationship);

// All relationship labels present in the graph, sorted.
std::vector<std::string> all_relationships(const KnowledgeGraph& g);

// Dataset rows: split<TAB>label<TAB>query-fact<TAB>candidate-fact.
void write_dataset(const KnowledgeGraph& g, const std::vector<LabeledInstance>& instances,
                   const std::string& path);
std::vector<LabeledInstance> read_dataset(const KnowledgeGraph& g, const std::string& path);

// Per-query grouped view of one split, preserving first-appearance order of
// queries and row order of candidates.
struct QueryGroup {
  Fact query;
  std::vector<Fact> candidates;
  std::vector<int> labels;
};
std::vector<QueryGroup> group_by_query(const std::vector<LabeledInstance>& instances, Split split);

}  // namespace factrank
