#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "factrank/distant.hpp"
#include "factrank/features.hpp"
#include "factrank/metrics.hpp"

namespace factrank {

// Heuristic scoring functions assembled from the feature formulas.
double baseline_fi(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                   const Fact& f_c);  // candidate informativeness; independent of f_q
double baseline_aps(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                    const Fact& f_c);  // mean predicate co-occurrence similarity
double baseline_aes(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f_q,
                    const Fact& f_c);  // mean type similarity over non-CVT entity pairs

// One ranked candidate list per query fact.
struct RankedQuery {
  Fact query;
  std::vector<std::pair<Fact, double>> ranked;  // score descending
};

struct RankedRun {
  std::string method;
  std::vector<RankedQuery> queries;
};

// Builds a run by scoring every candidate of every query group with fn and
// sorting score-descending, ties by serialized fact.
RankedRun score_run(const KnowledgeGraph& g, const std::vector<QueryGroup>& groups,
                    const std::string& method,
                    const std::function<double(const Fact&, const Fact&)>& fn, int threads);

// Replays the distant-supervision labels as scores (1 for labeled-relevant,
// 0 otherwise).
RankedRun distsup_run(const KnowledgeGraph& g, const std::vector<QueryGroup>& groups);

// Graded judgments: (query, candidate) -> grade in {0, 1, 2}.
struct Judgments {
  std::map<std::pair<Fact, Fact>, int> grades;

  int grade(const Fact& q, const Fact& c) const {
    auto it = grades.find({q, c});
    return it == grades.end() ? 0 : it->second;  // unjudged counts as irrelevant
  }
};

// TSV wire formats.
void write_run(const KnowledgeGraph& g, const RankedRun& run, const std::string& path);
RankedRun read_run(const KnowledgeGraph& g, const std::string& path);
void write_judgments(const KnowledgeGraph& g, const Judgments& judgments, const std::string& path);
Judgments read_judgments(const KnowledgeGraph& g, const std::string& path);

// Evaluation report: overall metrics, per-relationship means, per-query
// values, pairwise significance over the queries shared by every run.
struct QueryMetrics {
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  double ap = 0.0;
  double rr = 0.0;
};

struct RunEvaluation {
  std::string method;
  double map = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  double mrr = 0.0;
  std::size_t evaluated_queries = 0;
  std::map<std::string, QueryMetrics> per_relationship;  // means
  std::vector<std::pair<std::string, QueryMetrics>> per_query;  // keyed by serialized query
};

RunEvaluation evaluate_run(const KnowledgeGraph& g, const RankedRun& run,
                           const Judgments& judgments);

struct SignificanceCell {
  std::string metric;
  std::string method_a;
  std::string method_b;
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;
};

// Paired two-tailed t-tests for every method pair and metric, over the
// queries evaluated in both runs.
std::vector<SignificanceCell> significance_table(const std::vector<RunEvaluation>& evals);

std::string evaluation_report_json(const std::vector<RunEvaluation>& evals,
                                   const std::vector<SignificanceCell>& significance);

}  // namespace factrank
