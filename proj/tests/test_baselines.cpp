#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "factrank/baselines.hpp"
#include "helpers.hpp"

using namespace factrank;
using namespace factrank::testing;

TEST_CASE("FI delegates to informativeness and ignores the query") {
  KnowledgeGraph g = toy_kg();
  GraphStats stats = GraphStats::compute(g);
  auto q1 = fact1(g, "BillGates", "founderOf", "MSFT");
  auto q2 = fact1(g, "BillGates", "parentOf", "JenniferGates");
  auto cand = fact1(g, "PaulAllen", "founderOf", "MSFT");

  CHECK(baseline_fi(g, stats, q1, cand) == informativeness(g, stats, cand));
  CHECK(baseline_fi(g, stats, q1, cand) == baseline_fi(g, stats, q2, cand));
  CHECK(baseline_fi(g, stats, q1, q1) == doctest::Approx(0.8352).epsilon(1e-4));
}

TEST_CASE("APS hand values") {
  KnowledgeGraph g = toy_kg();
  GraphStats stats = GraphStats::compute(g);
  auto f = fact1(g, "BillGates", "founderOf", "MSFT");
  CHECK(baseline_aps(g, stats, f, f) == 1.0);
  auto other = fact1(g, "M1", "marriageDate", "D1994");
  CHECK(baseline_aps(g, stats, fact1(g, "MSFT", "foundedIn", "D1975"), other) == 0.0);
}

TEST_CASE("AES hand value on the co-founder pair") {
  KnowledgeGraph g = toy_kg();
  GraphStats stats = GraphStats::compute(g);
  auto q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto c = fact1(g, "PaulAllen", "founderOf", "MSFT");
  CHECK(baseline_aes(g, stats, q, c) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("baseline runs are deterministic") {
  KnowledgeGraph g = toy_kg();
  GraphStats stats = GraphStats::compute(g);
  auto q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto cands = enumerate_candidates(g, q, {}).candidates;
  std::vector<QueryGroup> groups{{q, cands, std::vector<int>(cands.size(), 0)}};

  auto fn = [&](const Fact& fq, const Fact& fc) { return baseline_aes(g, stats, fq, fc); };
  RankedRun a = score_run(g, groups, "aes", fn, 1);
  RankedRun b = score_run(g, groups, "aes", fn, 2);  // thread count must not matter
  REQUIRE(a.queries.size() == b.queries.size());
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    REQUIRE(a.queries[i].ranked.size() == b.queries[i].ranked.size());
    for (std::size_t j = 0; j < a.queries[i].ranked.size(); ++j) {
      CHECK(a.queries[i].ranked[j].first == b.queries[i].ranked[j].first);
      CHECK(a.queries[i].ranked[j].second == b.queries[i].ranked[j].second);
    }
  }
}

TEST_CASE("distsup run replays the labels") {
  KnowledgeGraph g = toy_kg();
  auto q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto cands = enumerate_candidates(g, q, {}).candidates;
  std::vector<int> labels(cands.size(), 0);
  labels[2] = 1;
  RankedRun run = distsup_run(g, {{q, cands, labels}});
  REQUIRE(run.queries.size() == 1);
  CHECK(run.queries[0].ranked.front().second == 1.0);
  CHECK(run.queries[0].ranked.front().first == cands[2]);
  for (std::size_t i = 1; i < run.queries[0].ranked.size(); ++i)
    CHECK(run.queries[0].ranked[i].second == 0.0);
}

TEST_CASE("run and judgment files round-trip") {
  KnowledgeGraph g = toy_kg();
  auto q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto cands = enumerate_candidates(g, q, {}).candidates;
  GraphStats stats = GraphStats::compute(g);
  RankedRun run = score_run(
      g, {{q, cands, std::vector<int>(cands.size(), 0)}}, "fi",
      [&](const Fact& fq, const Fact& fc) { return baseline_fi(g, stats, fq, fc); }, 1);

  auto tmp = std::filesystem::temp_directory_path();
  std::string rp = (tmp / "fr_run.tsv").string();
  write_run(g, run, rp);
  RankedRun back = read_run(g, rp);
  CHECK(back.method == "fi");
  REQUIRE(back.queries.size() == 1);
  REQUIRE(back.queries[0].ranked.size() == run.queries[0].ranked.size());
  for (std::size_t i = 0; i < back.queries[0].ranked.size(); ++i) {
    CHECK(back.queries[0].ranked[i].first == run.queries[0].ranked[i].first);
    CHECK(back.queries[0].ranked[i].second == run.queries[0].ranked[i].second);
  }

  Judgments j;
  j.grades[{q, cands[0]}] = 2;
  j.grades[{q, cands[1]}] = 1;
  std::string jp = (tmp / "fr_judg.tsv").string();
  write_judgments(g, j, jp);
  Judgments jb = read_judgments(g, jp);
  CHECK(jb.grades == j.grades);
  CHECK(jb.grade(q, cands[0]) == 2);
  CHECK(jb.grade(q, cands[2]) == 0);  // unjudged counts as irrelevant
}

TEST_CASE("evaluate_run computes per-query and aggregate metrics") {
  KnowledgeGraph g = toy_kg();
  auto q = fact1(g, "BillGates", "founderOf", "MSFT");
  auto cands = enumerate_candidates(g, q, {}).candidates;
  REQUIRE(cands.size() >= 3);

  // Ideal run: judged items first in grade order.
  Judgments j;
  j.grades[{q, cands[0]}] = 2;
  j.grades[{q, cands[1]}] = 1;
  RankedRun ideal;
  ideal.method = "ideal";
  RankedQuery rq;
  rq.query = q;
  double score = 1.0;
  rq.ranked.emplace_back(cands[0], score);
  rq.ranked.emplace_back(cands[1], score - 0.1);
  for (std::size_t i = 2; i < cands.size(); ++i) rq.ranked.emplace_back(cands[i], 0.0);
  ideal.queries.push_back(rq);

  RunEvaluation eval = evaluate_run(g, ideal, j);
  CHECK(eval.ndcg5 == 1.0);
  CHECK(eval.map == 1.0);
  CHECK(eval.mrr == 1.0);
  CHECK(eval.evaluated_queries == 1);

  // Worst run: reverse order pushes judged items to the bottom.
  RankedRun worst;
  worst.method = "worst";
  RankedQuery wq;
  wq.query = q;
  double s = 1.0;
  for (std::size_t i = cands.size(); i-- > 0;) wq.ranked.emplace_back(cands[i], s -= 0.01);
  worst.queries.push_back(wq);
  RunEvaluation weval = evaluate_run(g, worst, j);
  CHECK(weval.ndcg5 < eval.ndcg5);
  CHECK(weval.map < eval.map);

  // queries with no judged-relevant candidate are dropped
  RankedRun empty_run;
  empty_run.method = "nothing";
  RankedQuery eq;
  eq.query = fact1(g, "BillGates", "parentOf", "JenniferGates");
  eq.ranked.emplace_back(cands[0], 1.0);
  empty_run.queries.push_back(eq);
  RunEvaluation ee = evaluate_run(g, empty_run, j);
  CHECK(ee.evaluated_queries == 0);
}

TEST_CASE("significance table pairs methods over common queries") {
  KnowledgeGraph g = toy_kg();
  auto q1 = fact1(g, "BillGates", "founderOf", "MSFT");
  auto q2 = fact1(g, "PaulAllen", "founderOf", "MSFT");
  auto mk_eval = [&](const std::string& name, double ap1, double ap2) {
    RunEvaluation e;
    e.method = name;
    QueryMetrics m1;
    m1.ap = ap1;
    QueryMetrics m2;
    m2.ap = ap2;
    e.per_query.emplace_back(q1.serialize(g), m1);
    e.per_query.emplace_back(q2.serialize(g), m2);
    return e;
  };
  // differences are exactly representable (0.5 both), so the paired test is
  // degenerate with a nonzero mean
  auto table = significance_table({mk_eval("a", 0.75, 0.5), mk_eval("b", 0.25, 0.0)});
  REQUIRE(table.size() == 4);  // one per metric
  bool found = false;
  for (const auto& cell : table) {
    if (cell.metric == "map") {
      found = true;
      CHECK(cell.method_a == "a");
      CHECK(cell.method_b == "b");
      CHECK(cell.degenerate);
      CHECK(cell.p == 0.0);
    }
  }
  CHECK(found);

  std::string json = evaluation_report_json({mk_eval("a", 0.75, 0.5)}, table);
  CHECK(json.find("\"significance\"") != std::string::npos);
  CHECK(json.find("\"per_query\"") != std::string::npos);
}
