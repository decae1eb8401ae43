#pragma once

#include <map>
#include <string>
#include <vector>

#include "factrank/fact.hpp"

namespace factrank {

// Graded ranking metrics. Grades are listed in rank order. NDCG uses
// exponential gain 2^grade - 1 with a log2(rank + 1) discount; MAP and MRR
// binarize grade >= 1 as relevant.
double ndcg_at(const std::vector<int>& grades_in_rank_order, int k);
double average_precision(const std::vector<int>& grades_in_rank_order);
double reciprocal_rank(const std::vector<int>& grades_in_rank_order);

// Means over queries; queries without any relevant candidate are excluded.
double mean_over_queries(const std::vector<std::vector<int>>& runs, double (*per_query)(const std::vector<int>&));

// Paired two-tailed t-test over per-query metric values.
struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero variance of differences
};
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Student-t two-tailed p-value via the regularized incomplete beta function.
double student_t_two_tailed_p(double t, int dof);
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace factrank
