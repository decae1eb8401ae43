#include "factrank/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace factrank {

double baseline_fi(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                   const Fact& f_c) {
  (void)f_q;
  return informativeness(g, stats, f_c);
}

double baseline_aps(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                    const Fact& f_c) {
  (void)g;
  auto qp = f_q.predicate_seq();
  auto cp = f_c.predicate_seq();
  std::set<PredicateId> qs(qp.begin(), qp.end());
  std::set<PredicateId> cs(cp.begin(), cp.end());
  double acc = 0.0;
  std::size_t n = 0;
  for (PredicateId a : qs) {
    for (PredicateId b : cs) {
      acc += pred_coocc_sim(stats, a, b);
      n += 1;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double baseline_aes(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                    const Fact& f_c) {
  (void)stats;
  auto non_cvt = [&g](const Fact& f) {
    std::vector<EntityId> out;
    for (EntityId e : f.entities())
      if (!g.is_cvt(e)) out.push_back(e);
    return out;
  };
  double acc = 0.0;
  std::size_t n = 0;
  for (EntityId a : non_cvt(f_q)) {
    for (EntityId b : non_cvt(f_c)) {
      acc += ent_type_sim(g, a, b);
      n += 1;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

RankedRun score_run(const KnowledgeGraph& g, const std::vector<QueryGroup>& groups,
                    const std::string& method,
                    const std::function<double(const Fact&, const Fact&)>& fn, int threads) {
  RankedRun run;
  run.method = method;
  run.queries.resize(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t qi) {
    const QueryGroup& group = groups[qi];
    RankedQuery rq;
    rq.query = group.query;
    rq.ranked.reserve(group.candidates.size());
    for (const Fact& c : group.candidates) rq.ranked.emplace_back(c, fn(group.query, c));
    std::sort(rq.ranked.begin(), rq.ranked.end(), [&g](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first.serialize(g) < b.first.serialize(g);
    });
    run.queries[qi] = std::move(rq);
  });
  return run;
}

RankedRun distsup_run(const KnowledgeGraph& g, const std::vector<QueryGroup>& groups) {
  RankedRun run;
  run.method = "distsup";
  for (const QueryGroup& group : groups) {
    RankedQuery rq;
    rq.query = group.query;
    for (std::size_t i = 0; i < group.candidates.size(); ++i)
      rq.ranked.emplace_back(group.candidates[i], static_cast<double>(group.labels[i]));
    std::sort(rq.ranked.begin(), rq.ranked.end(), [&g](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first.serialize(g) < b.first.serialize(g);
    });
    run.queries.push_back(std::move(rq));
  }
  return run;
}

void write_run(const KnowledgeGraph& g, const RankedRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw DataError("cannot write file: " + path);
  std::ostringstream os;
  os.precision(17);
  for (const RankedQuery& rq : run.queries) {
    std::size_t rank = 1;
    for (const auto& [fact, score] : rq.ranked) {
      os.str("");
      os << score;
      out << rq.query.serialize(g) << '\t' << fact.serialize(g) << '\t' << rank << '\t' << os.str()
         << '\t' << run.method << '\n';
      rank += 1;
    }
  }
}

RankedRun read_run(const KnowledgeGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);
  RankedRun run;
  std::map<Fact, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    try {
      std::size_t pos = 0;
      Fact query = parse_fact_fields(g, fields, pos);
      Fact cand = parse_fact_fields(g, fields, pos);
      if (fields.size() - pos != 3) throw DataError("expected rank, score, method fields");
      double score = std::stod(fields[pos + 1]);
      run.method = fields[pos + 2];
      auto it = index.find(query);
      if (it == index.end()) {
        it = index.emplace(query, run.queries.size()).first;
        run.queries.push_back(RankedQuery{query, {}});
      }
      run.queries[it->second].ranked.emplace_back(cand, score);
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return run;
}

void write_judgments(const KnowledgeGraph& g, const Judgments& judgments,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw DataError("cannot write file: " + path);
  for (const auto& [pair, grade] : judgments.grades)
    out << pair.first.serialize(g) << '\t' << pair.second.serialize(g) << '\t' << grade << '\n';
}

Judgments read_judgments(const KnowledgeGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);
  Judgments out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    try {
      std::size_t pos = 0;
      Fact query = parse_fact_fields(g, fields, pos);
      Fact cand = parse_fact_fields(g, fields, pos);
      if (fields.size() - pos != 1) throw DataError("expected one grade field");
      int grade = std::stoi(fields[pos]);
      if (grade < 0 || grade > 2) throw DataError("grade must be 0, 1 or 2");
      out.grades[{query, cand}] = grade;
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

RunEvaluation evaluate_run(const KnowledgeGraph& g, const RankedRun& run,
                           const Judgments& judgments) {
  RunEvaluation eval;
  eval.method = run.method;
  struct RelAcc {
    QueryMetrics sum;
    std::size_t n = 0;
  };
  std::map<std::string, RelAcc> per_rel;
  QueryMetrics total;

  for (const RankedQuery& rq : run.queries) {
    std::vector<int> grades;
    grades.reserve(rq.ranked.size());
    bool has_relevant = false;
    for (const auto& [fact, score] : rq.ranked) {
      int grade = judgments.grade(rq.query, fact);
      has_relevant = has_relevant || grade >= 1;
      grades.push_back(grade);
    }
    if (!has_relevant) continue;  // trec-style: no relevant judged candidate

    QueryMetrics qm;
    qm.ndcg5 = ndcg_at(grades, 5);
    qm.ndcg10 = ndcg_at(grades, 10);
    qm.ap = average_precision(grades);
    qm.rr = reciprocal_rank(grades);
    eval.per_query.emplace_back(rq.query.serialize(g), qm);
    eval.evaluated_queries += 1;
    total.ndcg5 += qm.ndcg5;
    total.ndcg10 += qm.ndcg10;
    total.ap += qm.ap;
    total.rr += qm.rr;
    RelAcc& acc = per_rel[rq.query.relationship(g)];
    acc.sum.ndcg5 += qm.ndcg5;
    acc.sum.ndcg10 += qm.ndcg10;
    acc.sum.ap += qm.ap;
    acc.sum.rr += qm.rr;
    acc.n += 1;
  }

  if (eval.evaluated_queries > 0) {
    double n = static_cast<double>(eval.evaluated_queries);
    eval.map = total.ap / n;
    eval.ndcg5 = total.ndcg5 / n;
    eval.ndcg10 = total.ndcg10 / n;
    eval.mrr = total.rr / n;
  }
  for (auto& [rel, acc] : per_rel) {
    double n = static_cast<double>(acc.n);
    eval.per_relationship[rel] =
        QueryMetrics{acc.sum.ndcg5 / n, acc.sum.ndcg10 / n, acc.sum.ap / n, acc.sum.rr / n};
  }
  return eval;
}

std::vector<SignificanceCell> significance_table(const std::vector<RunEvaluation>& evals) {
  std::vector<SignificanceCell> table;
  std::vector<std::map<std::string, QueryMetrics>> by_query(evals.size());
  for (std::size_t i = 0; i < evals.size(); ++i)
    for (const auto& [query, qm] : evals[i].per_query) by_query[i][query] = qm;

  auto pick = [](const QueryMetrics& qm, const std::string& metric) {
    if (metric == "map") return qm.ap;
    if (metric == "ndcg5") return qm.ndcg5;
    if (metric == "ndcg10") return qm.ndcg10;
    return qm.rr;
  };

  for (std::size_t i = 0; i < evals.size(); ++i) {
    for (std::size_t j = i + 1; j < evals.size(); ++j) {
      std::vector<std::string> common;  // sorted by map order; same pairing for both runs
      for (const auto& [query, qm] : by_query[i])
        if (by_query[j].count(query)) common.push_back(query);
      if (common.size() < 2) continue;
      for (const std::string metric : {"map", "ndcg5", "ndcg10", "mrr"}) {
        std::vector<double> va, vb;
        for (const std::string& query : common) {
          va.push_back(pick(by_query[i][query], metric));
          vb.push_back(pick(by_query[j][query], metric));
        }
        TTestResult tt = paired_ttest(va, vb);
        table.push_back(SignificanceCell{metric, evals[i].method, evals[j].method, tt.t, tt.p,
                                         tt.degenerate});
      }
    }
  }
  return table;
}

std::string evaluation_report_json(const std::vector<RunEvaluation>& evals,
                                   const std::vector<SignificanceCell>& significance) {
  nlohmann::json j;
  for (const RunEvaluation& e : evals) {
    nlohmann::json m;
    m["map"] = e.map;
    m["ndcg5"] = e.ndcg5;
    m["ndcg10"] = e.ndcg10;
    m["mrr"] = e.mrr;
    m["evaluated_queries"] = e.evaluated_queries;
    for (const auto& [rel, qm] : e.per_relationship) {
      m["per_relationship"][rel] = {
          {"ndcg5", qm.ndcg5}, {"ndcg10", qm.ndcg10}, {"map", qm.ap}, {"mrr", qm.rr}};
    }
    for (const auto& [query, qm] : e.per_query) {
      m["per_query"][query] = {
          {"ndcg5", qm.ndcg5}, {"ndcg10", qm.ndcg10}, {"ap", qm.ap}, {"rr", qm.rr}};
    }
    j["methods"][e.method] = m;
  }
  for (const SignificanceCell& cell : significance) {
    nlohmann::json s;
    s["metric"] = cell.metric;
    s["method_a"] = cell.method_a;
    s["method_b"] = cell.method_b;
    s["t"] = cell.t;
    s["p"] = cell.p;
    s["degenerate"] = cell.degenerate;
    j["significance"].push_back(s);
  }
  return j.dump(2) + "\n";
}

}  // namespace factrank
