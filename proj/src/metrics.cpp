#include "factrank/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace factrank {

double ndcg_at(const std::vector<int>& grades, int k) {
  check(k >= 1, "ndcg_at: k must be >= 1");
  auto dcg = [k](const std::vector<int>& gs) {
    double acc = 0.0;
    std::size_t top = std::min<std::size_t>(gs.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < top; ++i) {
      double gain = std::pow(2.0, static_cast<double>(gs[i])) - 1.0;
      acc += gain / std::log2(static_cast<double>(i) + 2.0);
    }
    return acc;
  };
  std::vector<int> ideal = grades;
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  double idcg = dcg(ideal);
  if (idcg <= 0.0) return 0.0;
  return dcg(grades) / idcg;
}

double average_precision(const std::vector<int>& grades) {
  std::size_t relevant = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] >= 1) {
      relevant += 1;
      acc += static_cast<double>(relevant) / static_cast<double>(i + 1);
    }
  }
  if (relevant == 0) return 0.0;
  return acc / static_cast<double>(relevant);
}

double reciprocal_rank(const std::vector<int>& grades) {
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] >= 1) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double mean_over_queries(const std::vector<std::vector<int>>& runs,
                         double (*per_query)(const std::vector<int>&)) {
  double acc = 0.0;
  std::size_t counted = 0;
  for (const auto& grades : runs) {
    bool has_relevant = std::any_of(grades.begin(), grades.end(), [](int g) { return g >= 1; });
    if (!has_relevant) continue;
    acc += per_query(grades);
    counted += 1;
  }
  return counted == 0 ? 0.0 : acc / static_cast<double>(counted);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Continued fraction (Lentz), with the symmetry transform for convergence.
  auto cf = [](double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
  };
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * cf(a, b, x) / a;
  }
  return 1.0 - front * cf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, int dof) {
  check(dof >= 1, "student_t_two_tailed_p: dof must be >= 1");
  double df = static_cast<double>(dof);
  double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("paired_ttest: length mismatch");
  if (a.size() < 2) throw DataError("paired_ttest: need at least 2 paired observations");
  std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);

  TTestResult res;
  if (var == 0.0) {
    res.degenerate = true;
    res.t = 0.0;
    res.p = (mean == 0.0) ? 1.0 : 0.0;
    return res;
  }
  res.t = mean / std::sqrt(var / static_cast<double>(n));
  res.p = student_t_two_tailed_p(res.t, static_cast<int>(n) - 1);
  return res;
}

}  // namespace factrank
