#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "factrank/distant.hpp"
#include "helpers.hpp"

using namespace factrank;
using namespace factrank::testing;

namespace {

Corpus corpus_of(const KnowledgeGraph& g,
                 const std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>>&
                     docs) {
  Corpus corpus;
  for (const auto& [source, sentences] : docs) {
    Document doc;
    doc.source_entity = g.require_entity(source);
    for (const auto& sent : sentences) {
      std::vector<EntityId> mentions;
      for (const auto& name : sent) mentions.push_back(g.require_entity(name));
      doc.sentences.push_back(std::move(mentions));
    }
    corpus.by_source.emplace(doc.source_entity, corpus.documents.size());
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace

TEST_CASE("uniqueness rule labels the single connecting fact") {
  KnowledgeGraph g = toy_kg();
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto candidates = enumerate_candidates(g, f_q, {});
  Corpus corpus = corpus_of(g, {{"BillGates", {{"BillGates", "PaulAllen", "MSFT"}}}});

  LabelResult res = label_query_fact(g, corpus, f_q, candidates, {});
  REQUIRE(res.relevant.size() == 1);
  CHECK(res.relevant[0] == fact1(g, "PaulAllen", "founderOf", "MSFT"));
}

TEST_CASE("ambiguity rule drops pairs with several connecting facts") {
  // toy graph plus a second PaulAllen-MSFT edge.
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
      {"PaulAllen", "boardMemberOf", "MSFT"},
  };
  KnowledgeGraph g = KnowledgeGraph::build(entities, triples);
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto candidates = enumerate_candidates(g, f_q, {});
  Corpus corpus = corpus_of(g, {{"BillGates", {{"BillGates", "PaulAllen", "MSFT"}}}});

  LabelResult res = label_query_fact(g, corpus, f_q, candidates, {});
  CHECK(res.relevant.empty());
  CHECK(res.ambiguous_pairs > 0);
}

TEST_CASE("document without a sentence mentioning the target yields nothing") {
  KnowledgeGraph g = toy_kg();
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto candidates = enumerate_candidates(g, f_q, {});
  Corpus corpus = corpus_of(g, {{"BillGates", {{"PaulAllen", "MelindaGates"}}}});
  CHECK(label_query_fact(g, corpus, f_q, candidates, {}).relevant.empty());

  Corpus none = corpus_of(g, {{"PaulAllen", {{"MSFT", "BillGates"}}}});  // wrong source
  CHECK(label_query_fact(g, none, f_q, candidates, {}).relevant.empty());
}

TEST_CASE("the co-occurrence window keeps the first max_cooccurring other entities") {
  // star graph: Q -rel- T, and P1..P30 each connected to T by its own predicate.
  std::vector<EntityDecl> entities{{"Q", EntityKind::Regular, {}}, {"T", EntityKind::Regular, {}}};
  std::vector<TripleDecl> triples{{"Q", "rel", "T"}};
  for (int i = 0; i < 30; ++i) {
    std::string p = "P" + std::to_string(i);
    entities.push_back({p, EntityKind::Regular, {}});
    triples.push_back({p, "linked" + std::to_string(i), "T"});
  }
  KnowledgeGraph g = KnowledgeGraph::build(entities, triples);
  auto f_q = fact1(g, "Q", "rel", "T");
  auto candidates = enumerate_candidates(g, f_q, {});

  std::vector<std::string> sentence{"T"};
  for (int i = 0; i < 30; ++i) sentence.push_back("P" + std::to_string(i));
  Corpus corpus = corpus_of(g, {{"Q", {sentence}}});

  LabelConfig cfg;
  cfg.max_cooccurring = 20;
  LabelResult res = label_query_fact(g, corpus, f_q, candidates, cfg);
  CHECK(res.relevant.size() == 20);  // P20..P29 fall outside the window
  std::set<std::string> names;
  for (const Fact& f : res.relevant) names.insert(g.entity_name(f.source()));
  CHECK(names.count("P0") == 1);
  CHECK(names.count("P19") == 1);
  CHECK(names.count("P20") == 0);

  cfg.max_cooccurring = 5;
  CHECK(label_query_fact(g, corpus, f_q, candidates, cfg).relevant.size() == 5);
}

TEST_CASE("the query fact itself is never labeled relevant") {
  KnowledgeGraph g = toy_kg();
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto candidates = enumerate_candidates(g, f_q, {});
  // Sentence mentioning only t: the only pair is (s, t) whose unique
  // connecting fact is the query itself.
  Corpus corpus = corpus_of(g, {{"BillGates", {{"MSFT"}}}});
  CHECK(label_query_fact(g, corpus, f_q, candidates, {}).relevant.empty());
}

TEST_CASE("relevant facts outside the candidate set are counted, not injected") {
  KnowledgeGraph g = toy_kg();
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  CandidateSet empty_set;
  empty_set.query = f_q;
  Corpus corpus = corpus_of(g, {{"BillGates", {{"BillGates", "PaulAllen", "MSFT"}}}});
  LabelResult res = label_query_fact(g, corpus, f_q, empty_set, {});
  CHECK(res.relevant.empty());
  CHECK(res.outside_candidates == 1);
}

TEST_CASE("label monotonicity: adding a sentence never removes labels") {
  auto rng = rng_stream(53, "label-mono");
  KnowledgeGraph g = toy_kg();
  auto f_q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto candidates = enumerate_candidates(g, f_q, {});

  std::vector<std::vector<std::string>> sentences{
      {"MSFT", "PaulAllen"},
      {"MSFT", "D1975"},
      {"MSFT", "MelindaGates", "D1994"},
  };
  Corpus base = corpus_of(g, {{"BillGates", {sentences[0]}}});
  auto before = fact_set_strings(g, label_query_fact(g, base, f_q, candidates, {}).relevant);

  Corpus more = corpus_of(g, {{"BillGates", {sentences[0], sentences[1], sentences[2]}}});
  auto after = fact_set_strings(g, label_query_fact(g, more, f_q, candidates, {}).relevant);
  for (const auto& s : before) CHECK(after.count(s) == 1);
  (void)rng;
}

TEST_CASE("build_dataset splits 70/10/20 by floor/floor/remainder") {
  // Three eligible founderOf queries -> 2 train / 0 validation / 1 test.
  std::vector<EntityDecl> entities{
      {"C", EntityKind::Regular, {"company"}},   {"A", EntityKind::Regular, {"person"}},
      {"B", EntityKind::Regular, {"person"}},    {"D", EntityKind::Regular, {"person"}},
      {"E", EntityKind::Regular, {"person"}},
  };
  std::vector<TripleDecl> triples{
      {"A", "founderOf", "C"}, {"B", "founderOf", "C"}, {"D", "founderOf", "C"},
      {"E", "advises", "C"},
  };
  KnowledgeGraph g = KnowledgeGraph::build(entities, triples);
  Corpus corpus = corpus_of(g, {{"A", {{"C", "B"}}}, {"B", {{"C", "D"}}}, {"D", {{"C", "A"}}}});

  DatasetConfig cfg;
  cfg.seed = 5;
  Dataset ds = build_dataset(g, corpus, {"founderOf"}, cfg);

  std::set<std::string> train_queries, val_queries, test_queries;
  for (const auto& inst : ds.instances) {
    auto& sink = inst.split == Split::Train        ? train_queries
                 : inst.split == Split::Validation ? val_queries
                                                   : test_queries;
    sink.insert(inst.query.serialize(g));
  }
  CHECK(train_queries.size() == 2);
  CHECK(val_queries.size() == 0);
  CHECK(test_queries.size() == 1);
  CHECK(ds.stats.queries_per_relationship.at("founderOf") == 3);

  // every candidate of a kept query appears as an instance
  for (const auto& inst : ds.instances) {
    auto cands = enumerate_candidates(g, inst.query, cfg.enumeration);
    bool found = false;
    for (const Fact& c : cands.candidates) found = found || c == inst.candidate;
    CHECK(found);
  }
}

TEST_CASE("relationship with no eligible queries contributes nothing") {
  KnowledgeGraph g = toy_kg();
  Corpus corpus;  // empty: nothing is eligible
  DatasetConfig cfg;
  Dataset ds = build_dataset(g, corpus, {"founderOf", "parentOf"}, cfg);
  CHECK(ds.instances.empty());
  CHECK(ds.stats.queries_per_relationship.count("founderOf") == 0);
  CHECK_THROWS_AS(build_dataset(g, corpus, {}, cfg), DataError);
}

TEST_CASE("max_queries_per_relationship caps the sample") {
  std::vector<EntityDecl> entities{{"C", EntityKind::Regular, {"company"}}};
  std::vector<TripleDecl> triples;
  std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> docs;
  for (int i = 0; i < 8; ++i) {
    std::string a = "A" + std::to_string(i);
    std::string b = "B" + std::to_string(i);
    entities.push_back({a, EntityKind::Regular, {"person"}});
    entities.push_back({b, EntityKind::Regular, {"person"}});
    triples.push_back({a, "founderOf", "C"});
    triples.push_back({a, "mentorOf", b});
    docs.push_back({a, {{"C", b}}});
  }
  KnowledgeGraph g = KnowledgeGraph::build(entities, triples);
  Corpus corpus = corpus_of(g, docs);

  DatasetConfig cfg;
  cfg.seed = 9;
  cfg.max_queries_per_relationship = 4;
  Dataset ds = build_dataset(g, corpus, {"founderOf"}, cfg);
  CHECK(ds.stats.queries_per_relationship.at("founderOf") == 4);
}

TEST_CASE("dataset file round-trips and is byte-deterministic under one seed") {
  KnowledgeGraph g = toy_kg();
  Corpus corpus = corpus_of(g, {{"BillGates", {{"MSFT", "PaulAllen", "D1975"}}},
                                {"PaulAllen", {{"MSFT", "BillGates"}}}});
  DatasetConfig cfg;
  cfg.seed = 1234;
  Dataset a = build_dataset(g, corpus, {"founderOf"}, cfg);
  Dataset b = build_dataset(g, corpus, {"founderOf"}, cfg);
  REQUIRE(!a.instances.empty());

  auto tmp = std::filesystem::temp_directory_path();
  write_dataset(g, a.instances, (tmp / "fr_ds_a.tsv").string());
  write_dataset(g, b.instances, (tmp / "fr_ds_b.tsv").string());
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp((tmp / "fr_ds_a.tsv").string()) == slurp((tmp / "fr_ds_b.tsv").string()));

  auto back = read_dataset(g, (tmp / "fr_ds_a.tsv").string());
  REQUIRE(back.size() == a.instances.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].query == a.instances[i].query);
    CHECK(back[i].candidate == a.instances[i].candidate);
    CHECK(back[i].label == a.instances[i].label);
    CHECK(back[i].split == a.instances[i].split);
  }
}

TEST_CASE("facts_of_relationship enumerates by predicate sequence") {
  KnowledgeGraph g = toy_kg();
  auto founders = facts_of_relationship(g, "founderOf");
  CHECK(founders.size() == 2);
  for (const Fact& f : founders) CHECK(f.relationship(g) == "founderOf");

  auto spouses = facts_of_relationship(g, "marriage|spouse");
  REQUIRE(spouses.size() == 1);
  CHECK(spouses[0] == fact2(g, "BillGates", "marriage", "M1", "spouse", "MelindaGates"));

  CHECK(facts_of_relationship(g, "noSuch").empty());
  CHECK(facts_of_relationship(g, "marriage|noSuch").empty());
  CHECK_THROWS_AS(facts_of_relationship(g, "a|b|c"), DataError);

  auto all = all_relationships(g);
  std::set<std::string> labels(all.begin(), all.end());
  CHECK(labels.count("founderOf") == 1);
  CHECK(labels.count("marriage|spouse") == 1);
  CHECK(labels.count("marriage|marriageDate") == 1);
  CHECK(labels.count("spouse") == 1);  // the CVT leg is a fact of its own
  CHECK(labels.count("marriage") == 0);  // CVT object cannot end a fact
}

TEST_CASE("planted corpus labels exactly the planted facts") {
  // A world where each document sentence mentions exactly the pair entities
  // of one planted fact, so labeling precision against the plant is 1.0.
  std::vector<EntityDecl> entities{
      {"c0", EntityKind::Regular, {"company"}},  {"c1", EntityKind::Regular, {"company"}},
      {"p0", EntityKind::Regular, {"person"}},   {"p1", EntityKind::Regular, {"person"}},
      {"p2", EntityKind::Regular, {"person"}},   {"d0", EntityKind::Date, {}},
      {"city0", EntityKind::Regular, {"city"}},
  };
  std::vector<TripleDecl> triples{
      {"p0", "founderOf", "c0"}, {"p1", "founderOf", "c0"}, {"c0", "foundedIn", "d0"},
      {"c0", "headquarteredIn", "city0"}, {"p2", "ceoOf", "c1"}, {"p0", "mentorOf", "p2"},
  };
  KnowledgeGraph g = KnowledgeGraph::build(entities, triples);
  auto f_q = fact1(g, "p0", "founderOf", "c0");
  auto candidates = enumerate_candidates(g, f_q, {});

  std::set<std::string> planted{
      fact1(g, "p1", "founderOf", "c0").serialize(g),
      fact1(g, "c0", "foundedIn", "d0").serialize(g),
  };
  Corpus corpus = corpus_of(g, {{"p0", {{"c0", "p1", "d0"}}}});
  LabelResult res = label_query_fact(g, corpus, f_q, candidates, {});
  CHECK(fact_set_strings(g, res.relevant) == planted);  // precision and recall 1.0
}
