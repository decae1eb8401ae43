#include "doctest.h"

#include <cmath>

#include "factrank/metrics.hpp"
#include "factrank/util.hpp"

using namespace factrank;

namespace {

// Independent reference evaluators for the oracle comparison.
double ref_dcg(const std::vector<int>& grades, int k) {
  double acc = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(grades.size()); ++i)
    acc += (std::exp2(grades[static_cast<std::size_t>(i)]) - 1.0) / std::log2(i + 2.0);
  return acc;
}

double ref_ndcg(std::vector<int> grades, int k) {
  double dcg = ref_dcg(grades, k);
  std::vector<int> ideal = grades;
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = ref_dcg(ideal, k);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double ref_ap(const std::vector<int>& grades) {
  double hits = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] >= 1) {
      hits += 1.0;
      acc += hits / static_cast<double>(i + 1);
    }
  }
  return hits > 0.0 ? acc / hits : 0.0;
}

double ref_rr(const std::vector<int>& grades) {
  for (std::size_t i = 0; i < grades.size(); ++i)
    if (grades[i] >= 1) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

// Two-tailed p via Simpson quadrature over the Student-t density, as a
// second route independent of the incomplete-beta evaluation. Integrates the
// central region [-t, t], which is finite, and takes the complement.
double ref_t_two_tailed_p(double t, int dof) {
  double v = static_cast<double>(dof);
  auto pdf = [v](double x) {
    double ln = std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0) -
                0.5 * std::log(v * 3.14159265358979323846) -
                ((v + 1.0) / 2.0) * std::log1p(x * x / v);
    return std::exp(ln);
  };
  double a = std::fabs(t);
  if (a == 0.0) return 1.0;
  int n = 20000;
  double h = a / n;
  double acc = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * pdf(i * h);
  double central = acc * h / 3.0;
  return std::max(0.0, 1.0 - 2.0 * central);
}

}  // namespace

TEST_CASE("ndcg hand example [2,0,1] at k=3") {
  double v = ndcg_at({2, 0, 1}, 3);
  CHECK(v == doctest::Approx(3.5 / (3.0 + 1.0 / std::log2(3.0))).epsilon(1e-12));
  CHECK(std::fabs(v - 0.9639) < 1e-4);
}

TEST_CASE("ndcg trivial cases") {
  CHECK(ndcg_at({2, 1, 0}, 3) == 1.0);
  CHECK(ndcg_at({0, 0, 0}, 5) == 0.0);
  CHECK(ndcg_at({}, 5) == 0.0);
  CHECK(ndcg_at({1}, 1) == 1.0);
}

TEST_CASE("ndcg strictly decreases when a lower grade is swapped above a higher one") {
  auto rng = rng_stream(59, "ndcg-swap");
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + uniform_below(rng, 10);
    std::vector<int> grades(n);
    for (auto& v : grades) v = static_cast<int>(uniform_below(rng, 3));
    std::size_t i = uniform_below(rng, n - 1);
    if (grades[i] <= grades[i + 1]) continue;
    double before = ndcg_at(grades, static_cast<int>(n));
    std::swap(grades[i], grades[i + 1]);
    double after = ndcg_at(grades, static_cast<int>(n));
    CHECK(after < before);
  }
}

TEST_CASE("average precision hand example [1,0,1]") {
  CHECK(average_precision({1, 0, 1}) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
  CHECK(std::fabs(average_precision({1, 0, 1}) - 0.8333) < 1e-4);
}

TEST_CASE("reciprocal rank") {
  CHECK(reciprocal_rank({1, 0, 0}) == 1.0);
  CHECK(reciprocal_rank({0, 0, 0, 2}) == 0.25);
  CHECK(reciprocal_rank({0, 0}) == 0.0);
}

TEST_CASE("metrics match the reference evaluator on random runs") {
  auto rng = rng_stream(61, "metric-oracle");
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + uniform_below(rng, 40);
    std::vector<int> grades(n);
    for (auto& v : grades) v = static_cast<int>(uniform_below(rng, 3));
    for (int k : {1, 3, 5, 10, static_cast<int>(n)}) {
      CHECK(std::fabs(ndcg_at(grades, k) - ref_ndcg(grades, k)) <= 1e-10);
    }
    CHECK(std::fabs(average_precision(grades) - ref_ap(grades)) <= 1e-10);
    CHECK(std::fabs(reciprocal_rank(grades) - ref_rr(grades)) <= 1e-10);
  }
}

TEST_CASE("map and mrr are invariant under relabeling grade 2 to 1") {
  auto rng = rng_stream(67, "binarize");
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + uniform_below(rng, 20);
    std::vector<int> grades(n), relabeled(n);
    for (std::size_t i = 0; i < n; ++i) {
      grades[i] = static_cast<int>(uniform_below(rng, 3));
      relabeled[i] = grades[i] >= 1 ? 1 : 0;
    }
    CHECK(average_precision(grades) == average_precision(relabeled));
    CHECK(reciprocal_rank(grades) == reciprocal_rank(relabeled));
  }
}

TEST_CASE("queries without relevant candidates are excluded from means") {
  std::vector<std::vector<int>> runs{{1, 0}, {0, 0}, {0, 1}};
  double m = mean_over_queries(runs, average_precision);
  CHECK(m == doctest::Approx((1.0 + 0.5) / 2.0));
  CHECK(mean_over_queries({{0, 0}}, average_precision) == 0.0);
}

TEST_CASE("paired t-test degenerate and hand cases") {
  SUBCASE("identical lists -> degenerate, no significant difference") {
    TTestResult r = paired_ttest({0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
    CHECK(r.degenerate);
    CHECK(r.p == 1.0);
  }
  SUBCASE("constant nonzero difference -> degenerate, p = 0") {
    TTestResult r = paired_ttest({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
    CHECK(r.degenerate);
    CHECK(r.p == 0.0);
  }
  SUBCASE("n=2 with opposite differences -> t = 0, p = 1") {
    TTestResult r = paired_ttest({1.0, 0.0}, {0.0, 1.0});
    CHECK(!r.degenerate);
    CHECK(r.t == doctest::Approx(0.0));
    CHECK(r.p == doctest::Approx(1.0));
  }
  SUBCASE("near-constant positive differences are significant") {
    std::vector<double> a{1.001, 0.999, 1.0005, 0.9995, 1.0002};
    std::vector<double> b(5, 0.0);
    TTestResult r = paired_ttest(a, b);
    CHECK(r.p < 0.05);
    CHECK(r.t > 10.0);
  }
  SUBCASE("length mismatch and tiny samples are rejected") {
    CHECK_THROWS_AS(paired_ttest({1.0}, {1.0, 2.0}), DataError);
    CHECK_THROWS_AS(paired_ttest({1.0}, {1.0}), DataError);
  }
}

TEST_CASE("student-t p matches quadrature over the density") {
  for (double t : {0.0, 0.5, 1.0, 2.0, 3.5, 7.0}) {
    for (int dof : {1, 2, 5, 10, 30}) {
      double via_beta = student_t_two_tailed_p(t, dof);
      double via_quad = ref_t_two_tailed_p(t, dof);
      CHECK(std::fabs(via_beta - via_quad) <= 1e-8);
    }
  }
}

TEST_CASE("paired t-test agrees with quadrature on random data") {
  auto rng = rng_stream(71, "ttest-rand");
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 3 + uniform_below(rng, 20);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = uniform_unit(rng);
      b[i] = uniform_unit(rng);
    }
    TTestResult r = paired_ttest(a, b);
    if (r.degenerate) continue;
    CHECK(std::fabs(r.p - ref_t_two_tailed_p(r.t, static_cast<int>(n) - 1)) <= 1e-8);
  }
}
