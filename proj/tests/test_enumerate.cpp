#include "doctest.h"

#include "helpers.hpp"

using namespace factrank;
using namespace factrank::testing;

TEST_CASE("toy-graph candidates for founderOf(BillGates, MSFT)") {
  KnowledgeGraph g = toy_kg();
  auto query = fact1(g, "BillGates", "founderOf", "MSFT");
  auto result = enumerate_candidates(g, query, {});
  auto got = fact_set_strings(g, result.candidates);

  for (const Fact& expected : {
           fact1(g, "PaulAllen", "founderOf", "MSFT"),
           fact2(g, "BillGates", "marriage", "M1", "spouse", "MelindaGates"),
           fact1(g, "M1", "marriageDate", "D1994"),
           fact1(g, "MSFT", "foundedIn", "D1975"),
           fact1(g, "BillGates", "parentOf", "JenniferGates"),
       }) {
    CHECK(got.count(expected.serialize(g)));
  }
  CHECK(!got.count(query.serialize(g)));

  auto oracle = oracle_enumerate(g, query);
  CHECK(got == fact_set_strings(g, oracle));
}

TEST_CASE("isolated two-node graph yields no candidates") {
  KnowledgeGraph g = KnowledgeGraph::build(
      {{"A", EntityKind::Regular, {}}, {"B", EntityKind::Regular, {}}}, {{"A", "rel", "B"}});
  auto query = fact1(g, "A", "rel", "B");
  CHECK(enumerate_candidates(g, query, {}).candidates.empty());
}

TEST_CASE("class neighbors are not expanded") {
  // chain: A -likes-> C(class) <-likes- B -knows-> D ; query at (A, E).
  KnowledgeGraph g = KnowledgeGraph::build({{"A", EntityKind::Regular, {}},
                                            {"B", EntityKind::Regular, {}},
                                            {"C", EntityKind::ClassOrType, {}},
                                            {"D", EntityKind::Regular, {}},
                                            {"E", EntityKind::Regular, {}}},
                                           {{"A", "rel", "E"},
                                            {"A", "likes", "C"},
                                            {"B", "likes", "C"},
                                            {"B", "knows", "D"}});
  auto query = fact1(g, "A", "rel", "E");
  auto got = fact_set_strings(g, enumerate_candidates(g, query, {}).candidates);

  CHECK(got.count(fact1(g, "A", "likes", "C").serialize(g)));       // level 1
  CHECK(!got.count(fact1(g, "B", "likes", "C").serialize(g)));      // behind the class node
  CHECK(!got.count(fact1(g, "B", "knows", "D").serialize(g)));
  CHECK(got == fact_set_strings(g, oracle_enumerate(g, query)));

  // Same shape through a regular node: both facts appear.
  KnowledgeGraph g2 = KnowledgeGraph::build({{"A", EntityKind::Regular, {}},
                                             {"B", EntityKind::Regular, {}},
                                             {"C", EntityKind::Regular, {}},
                                             {"D", EntityKind::Regular, {}},
                                             {"E", EntityKind::Regular, {}}},
                                            {{"A", "rel", "E"},
                                             {"A", "likes", "C"},
                                             {"B", "likes", "C"},
                                             {"B", "knows", "D"}});
  auto query2 = fact1(g2, "A", "rel", "E");
  auto got2 = fact_set_strings(g2, enumerate_candidates(g2, query2, {}).candidates);
  CHECK(got2.count(fact1(g2, "B", "likes", "C").serialize(g2)));
  CHECK(!got2.count(fact1(g2, "B", "knows", "D").serialize(g2)));  // 3 hops out
  CHECK(got2 == fact_set_strings(g2, oracle_enumerate(g2, query2)));
}

TEST_CASE("query fact must exist in the graph") {
  KnowledgeGraph g = toy_kg();
  Fact ghost = fact1(g, "BillGates", "founderOf", "JenniferGates");  // triple not in K
  CHECK_THROWS_AS(enumerate_candidates(g, ghost, {}), DataError);
}

TEST_CASE("enumeration equals the brute-force materializer on random graphs") {
  auto rng = rng_stream(23, "enum-oracle");
  int compared = 0;
  for (int trial = 0; trial < 120; ++trial) {
    KnowledgeGraph g = random_graph(rng);
    auto q = sample_fact(g, rng);
    if (!q) continue;
    auto fast = enumerate_candidates(g, *q, {});
    auto slow = oracle_enumerate(g, *q);
    CHECK(fact_set_strings(g, fast.candidates) == fact_set_strings(g, slow));
    compared += 1;
  }
  CHECK(compared > 80);
}

TEST_CASE("enumeration is deterministic and respects max_candidates ordering") {
  auto rng = rng_stream(29, "enum-det");
  KnowledgeGraph g = random_graph(rng);
  auto q = sample_fact(g, rng);
  REQUIRE(q.has_value());
  auto a = enumerate_candidates(g, *q, {});
  auto b = enumerate_candidates(g, *q, {});
  CHECK(a.candidates == b.candidates);

  // ordered by (relationship, source, target)
  for (std::size_t i = 1; i < a.candidates.size(); ++i) {
    auto key = [&](const Fact& f) {
      return std::make_tuple(f.relationship(g), g.entity_name(f.source()),
                             g.entity_name(f.target()), f.serialize(g));
    };
    CHECK(key(a.candidates[i - 1]) < key(a.candidates[i]));
  }

  EnumConfig capped;
  capped.max_candidates = 3;
  auto c = enumerate_candidates(g, *q, capped);
  if (a.candidates.size() >= 3) {
    REQUIRE(c.candidates.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(c.candidates[i] == a.candidates[i]);
  }
}

TEST_CASE("candidate entities stay within 2 CVT-free hops of the query endpoints") {
  auto rng = rng_stream(31, "enum-bfs");
  for (int trial = 0; trial < 40; ++trial) {
    KnowledgeGraph g = random_graph(rng);
    auto q = sample_fact(g, rng);
    if (!q) continue;
    auto result = enumerate_candidates(g, *q, {});
    auto ds = cvt_free_distances(g, q->source(), 2);
    auto dt = cvt_free_distances(g, q->target(), 2);
    for (const Fact& f : result.candidates) {
      for (EntityId e : f.entities()) {
        int d = std::min(ds[static_cast<std::size_t>(e)], dt[static_cast<std::size_t>(e)]);
        CHECK(d <= 2);
      }
    }
  }
}

TEST_CASE("connecting paths on the toy graph") {
  KnowledgeGraph g = toy_kg();
  SUBCASE("single inverse path MSFT -> PaulAllen") {
    auto ps = connecting_paths(g, g.require_entity("MSFT"), {g.require_entity("PaulAllen")}, {});
    REQUIRE(ps.paths.size() == 1);
    CHECK(ps.paths[0].serialize(g) == "MSFT|founderOf<|PaulAllen");
    CHECK(ps.paths[0].steps[0].inverse);
  }
  SUBCASE("origin equals destination yields nothing") {
    auto ps = connecting_paths(g, g.require_entity("MSFT"), {g.require_entity("MSFT")}, {});
    CHECK(ps.paths.empty());
  }
  SUBCASE("CVT chain counts as one hop") {
    auto ps =
        connecting_paths(g, g.require_entity("BillGates"), {g.require_entity("MelindaGates")}, {});
    bool found = false;
    for (const Path& p : ps.paths)
      found = found || p.serialize(g) == "BillGates|marriage>|M1|spouse>|MelindaGates";
    CHECK(found);
  }
  SUBCASE("two-hop reach through a person") {
    // MSFT <-founderOf- BillGates -marriage-> M1 -spouse-> MelindaGates is
    // 2 hops (M1 free), so MelindaGates is reachable from MSFT.
    auto ps =
        connecting_paths(g, g.require_entity("MSFT"), {g.require_entity("MelindaGates")}, {});
    CHECK(!ps.paths.empty());
  }
}

TEST_CASE("connecting paths never revisit an entity and respect the cap") {
  auto rng = rng_stream(37, "paths-props");
  for (int trial = 0; trial < 30; ++trial) {
    KnowledgeGraph g = random_graph(rng);
    if (g.num_entities() == 0) continue;
    EntityId origin = static_cast<EntityId>(uniform_below(rng, g.num_entities()));
    std::vector<EntityId> dests;
    for (int i = 0; i < 5; ++i)
      dests.push_back(static_cast<EntityId>(uniform_below(rng, g.num_entities())));

    EnumConfig cfg;
    cfg.max_paths_per_pair = 4;
    auto ps = connecting_paths(g, origin, dests, cfg);

    std::map<EntityId, std::size_t> per_dest;
    for (const Path& p : ps.paths) {
      CHECK(p.entities.front() == origin);
      std::set<EntityId> seen(p.entities.begin(), p.entities.end());
      CHECK(seen.size() == p.entities.size());
      per_dest[p.entities.back()] += 1;
    }
    for (auto& [dest, n] : per_dest) CHECK(n <= 4);

    // The capped set is the lexicographically smallest prefix of the full set.
    EnumConfig full;
    full.max_paths_per_pair = 100000;
    auto all = connecting_paths(g, origin, dests, full);
    std::map<EntityId, std::vector<std::string>> full_by_dest;
    for (const Path& p : all.paths) full_by_dest[p.entities.back()].push_back(p.serialize(g));
    std::map<EntityId, std::vector<std::string>> capped_by_dest;
    for (const Path& p : ps.paths) capped_by_dest[p.entities.back()].push_back(p.serialize(g));
    for (auto& [dest, sers] : capped_by_dest) {
      auto& fs = full_by_dest[dest];
      std::sort(fs.begin(), fs.end());
      std::vector<std::string> expect(fs.begin(),
                                      fs.begin() + std::min<std::size_t>(fs.size(), 4));
      CHECK(sers == expect);
    }
  }
}
