#include "factrank/features.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace factrank {

GraphStats GraphStats::compute(const KnowledgeGraph& g) {
  GraphStats s;
  s.num_triples = static_cast<std::int64_t>(g.num_triples());
  s.pred_count.assign(g.num_predicates(), 0);
  s.ent_triple_count.assign(g.num_entities(), 0);
  s.subj_count.assign(g.num_entities(), 0);
  s.obj_count.assign(g.num_entities(), 0);

  std::vector<std::set<EntityId>> pred_ents(g.num_predicates());
  for (const Triple& t : g.triples()) {
    s.pred_count[static_cast<std::size_t>(t.predicate)] += 1;
    s.subj_count[static_cast<std::size_t>(t.subject)] += 1;
    s.obj_count[static_cast<std::size_t>(t.object)] += 1;
    s.ent_triple_count[static_cast<std::size_t>(t.subject)] += 1;
    if (t.object != t.subject) s.ent_triple_count[static_cast<std::size_t>(t.object)] += 1;
    pred_ents[static_cast<std::size_t>(t.predicate)].insert(t.subject);
    pred_ents[static_cast<std::size_t>(t.predicate)].insert(t.object);
  }
  s.pred_entities.reserve(pred_ents.size());
  for (auto& es : pred_ents) s.pred_entities.emplace_back(es.begin(), es.end());
  return s;
}

double pred_freq(const GraphStats& stats, PredicateId p) {
  if (stats.num_triples == 0) throw DataError("pred_freq: empty graph");
  if (p < 0 || static_cast<std::size_t>(p) >= stats.pred_count.size()) return 0.0;
  return static_cast<double>(stats.pred_count[static_cast<std::size_t>(p)]) /
         static_cast<double>(stats.num_triples);
}

double ent_freq(const GraphStats& stats, EntityId e) {
  if (stats.num_triples == 0) throw DataError("ent_freq: empty graph");
  if (e < 0 || static_cast<std::size_t>(e) >= stats.ent_triple_count.size()) return 0.0;
  return static_cast<double>(stats.ent_triple_count[static_cast<std::size_t>(e)]) /
         static_cast<double>(stats.num_triples);
}

double inverse_triple_freq(const GraphStats& stats, PredicateId p) {
  if (stats.num_triples == 0) throw DataError("inverse_triple_freq: empty graph");
  std::int64_t c = stats.pred_count.at(static_cast<std::size_t>(p));
  check(c > 0, "inverse_triple_freq: predicate without triples");
  return std::log(static_cast<double>(stats.num_triples) / static_cast<double>(c));
}

double pf_out(const KnowledgeGraph& g, PredicateId p, EntityId e) {
  const auto& out = g.out_triples(e);
  if (out.empty()) return 0.0;
  std::int64_t hit = 0;
  for (std::uint32_t i : out)
    if (g.triple(i).predicate == p) ++hit;
  return static_cast<double>(hit) / static_cast<double>(out.size());
}

double pf_in(const KnowledgeGraph& g, PredicateId p, EntityId e) {
  const auto& in = g.in_triples(e);
  if (in.empty()) return 0.0;
  std::int64_t hit = 0;
  for (std::uint32_t i : in)
    if (g.triple(i).predicate == p) ++hit;
  return static_cast<double>(hit) / static_cast<double>(in.size());
}

double informativeness(const KnowledgeGraph& g, const GraphStats& stats, const Fact& f) {
  if (stats.num_triples == 0) throw DataError("informativeness: empty graph");
  double sum = 0.0;
  for (const Triple& t : f.triples()) {
    double itf = inverse_triple_freq(stats, t.predicate);
    sum += pf_out(g, t.predicate, t.subject) * itf;
    sum += pf_in(g, t.predicate, t.object) * itf;
  }
  return sum / (2.0 * static_cast<double>(f.size()));
}

namespace {

double jaccard_sorted(const std::vector<EntityId>& a, const std::vector<EntityId>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double ent_type_sim(const KnowledgeGraph& g, EntityId e1, EntityId e2) {
  const auto& a = g.entity_types(e1);
  const auto& b = g.entity_types(e2);
  if (a.empty() && b.empty()) return 0.0;
  std::set<TypeId> sa(a.begin(), a.end());
  std::set<TypeId> sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (TypeId t : sa) inter += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pred_coocc_sim(const GraphStats& stats, PredicateId p1, PredicateId p2) {
  if (p1 < 0 || p2 < 0) return 0.0;
  return jaccard_sorted(stats.pred_entities.at(static_cast<std::size_t>(p1)),
                        stats.pred_entities.at(static_cast<std::size_t>(p2)));
}

double pred_set_jaccard(const Fact& f_q, const Fact& f_c) {
  auto qs = f_q.predicate_seq();
  auto cs = f_c.predicate_seq();
  std::set<PredicateId> a(qs.begin(), qs.end());
  std::set<PredicateId> b(cs.begin(), cs.end());
  std::size_t inter = 0;
  for (PredicateId p : a) inter += b.count(p);
  std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<int> bfs_distances(const KnowledgeGraph& g, EntityId source, int d_max) {
  std::vector<int> dist(g.num_entities(), d_max + 1);
  dist[static_cast<std::size_t>(source)] = 0;
  std::queue<EntityId> queue;
  queue.push(source);
  while (!queue.empty()) {
    EntityId at = queue.front();
    queue.pop();
    int d = dist[static_cast<std::size_t>(at)];
    if (d >= d_max) continue;
    auto relax = [&](EntityId next) {
      if (dist[static_cast<std::size_t>(next)] <= d + 1) return;
      dist[static_cast<std::size_t>(next)] = d + 1;
      queue.push(next);
    };
    for (std::uint32_t i : g.out_triples(at)) relax(g.triple(i).object);
    for (std::uint32_t i : g.in_triples(at)) relax(g.triple(i).subject);
  }
  return dist;
}

int entity_distance(const KnowledgeGraph& g, EntityId e1, EntityId e2, int d_max) {
  if (e1 == e2) return 0;
  auto dist = bfs_distances(g, e1, d_max);
  return dist[static_cast<std::size_t>(e2)];
}

const std::vector<int>& DistanceCache::get(const KnowledgeGraph& g, EntityId source) {
  auto it = by_source.find(source);
  if (it != by_source.end()) return it->second;
  return by_source.emplace(source, bfs_distances(g, source, d_max)).first->second;
}

FeatureLayout FeatureLayout::make(const std::vector<std::string>& rel_vocab) {
  FeatureLayout layout;
  layout.rel_vocab = rel_vocab;
  std::size_t at = 0;
  auto add = [&](const std::string& name, std::size_t width) {
    layout.slots.push_back(FeatureSlot{name, at, at + width});
    at += width;
  };
  add("q_pred_freq_min_max_avg", 3);
  add("c_pred_freq_min_max_avg", 3);
  add("q_ent_freq_min_max_avg", 3);
  add("c_ent_freq_min_max_avg", 3);
  add("q_informativeness", 1);
  add("c_informativeness", 1);
  add("ent_type_sim_min_max_avg", 3);
  add("entity_distance_min_max_avg", 3);
  add("pred_coocc_sim_min_max_avg", 3);
  add("pred_set_jaccard", 1);
  add("shares_cvt", 1);
  add("q_has_cvt", 1);
  add("c_has_cvt", 1);
  add("q_is_date_subject_tail_attr", 3);
  add("c_is_date_subject_tail_attr", 3);
  add("q_relationship_onehot", rel_vocab.size());
  layout.length = at;
  check(layout.length == kBaseFeatureCount + rel_vocab.size(), "feature layout width drifted");
  return layout;
}

std::string FeatureLayout::to_json() const {
  std::ostringstream os;
  os << "{\n  \"length\": " << length << ",\n  \"slots\": [\n";
  for (std::size_t i = 0; i < slots.size(); ++i) {
    os << "    {\"name\": \"" << slots[i].name << "\", \"begin\": " << slots[i].begin
       << ", \"end\": " << slots[i].end << "}";
    os << (i + 1 < slots.size() ? ",\n" : "\n");
  }
  os << "  ],\n  \"relationship_vocab\": [";
  for (std::size_t i = 0; i < rel_vocab.size(); ++i) {
    os << "\"" << rel_vocab[i] << "\"" << (i + 1 < rel_vocab.size() ? ", " : "");
  }
  os << "]\n}\n";
  return os.str();
}

namespace {

struct MinMaxAvg {
  double min = 0.0, max = 0.0, avg = 0.0;
};

MinMaxAvg aggregate(const std::vector<double>& values) {
  check(!values.empty(), "metafeature over empty value list");
  MinMaxAvg m;
  m.min = m.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
    sum += v;
  }
  m.avg = sum / static_cast<double>(values.size());
  return m;
}

std::vector<EntityId> non_cvt_entities(const KnowledgeGraph& g, const Fact& f) {
  std::vector<EntityId> out;
  for (EntityId e : f.entities())
    if (!g.is_cvt(e)) out.push_back(e);
  return out;
}

std::vector<EntityId> cvt_entities(const KnowledgeGraph& g, const Fact& f) {
  std::vector<EntityId> out;
  for (EntityId e : f.entities())
    if (g.is_cvt(e)) out.push_back(e);
  return out;
}

}  // namespace

std::vector<double> extract_features(const KnowledgeGraph& g, const GraphStats& stats,
                                     const Fact& f_q, const Fact& f_c,
                                     const FeatureLayout& layout, DistanceCache& dcache) {
  std::vector<double> x;
  x.reserve(layout.length);

  auto push_mma = [&x](const MinMaxAvg& m) {
    x.push_back(m.min);
    x.push_back(m.max);
    x.push_back(m.avg);
  };

  // Group (i): importance of each fact on its own.
  for (const Fact* f : {&f_q, &f_c}) {
    std::vector<double> vals;
    for (PredicateId p : f->predicate_seq()) vals.push_back(pred_freq(stats, p));
    push_mma(aggregate(vals));
  }
  for (const Fact* f : {&f_q, &f_c}) {
    std::vector<double> vals;
    for (EntityId e : non_cvt_entities(g, *f)) vals.push_back(ent_freq(stats, e));
    push_mma(aggregate(vals));
  }
  x.push_back(informativeness(g, stats, f_q));
  x.push_back(informativeness(g, stats, f_c));

  // Group (ii): relevance of the candidate w.r.t. the query.
  auto q_ents = non_cvt_entities(g, f_q);
  auto c_ents = non_cvt_entities(g, f_c);
  {
    std::vector<double> sims;
    for (EntityId a : q_ents)
      for (EntityId b : c_ents) sims.push_back(ent_type_sim(g, a, b));
    push_mma(aggregate(sims));
  }
  {
    std::vector<double> dists;
    for (EntityId a : q_ents) {
      const auto& dist = dcache.get(g, a);
      for (EntityId b : c_ents) dists.push_back(static_cast<double>(dist[static_cast<std::size_t>(b)]));
    }
    push_mma(aggregate(dists));
  }
  {
    auto qp = f_q.predicate_seq();
    auto cp = f_c.predicate_seq();
    std::set<PredicateId> qs(qp.begin(), qp.end());
    std::set<PredicateId> cs(cp.begin(), cp.end());
    std::vector<double> sims;
    for (PredicateId a : qs)
      for (PredicateId b : cs) sims.push_back(pred_coocc_sim(stats, a, b));
    push_mma(aggregate(sims));
  }
  x.push_back(pred_set_jaccard(f_q, f_c));
  {
    auto qc = cvt_entities(g, f_q);
    auto cc = cvt_entities(g, f_c);
    bool shared = false;
    for (EntityId a : qc)
      for (EntityId b : cc) shared = shared || a == b;
    x.push_back(shared ? 1.0 : 0.0);
  }

  // Group (iii): miscellaneous flags and the query relationship one-hot.
  x.push_back(f_q.has_cvt() ? 1.0 : 0.0);
  x.push_back(f_c.has_cvt() ? 1.0 : 0.0);
  for (const Fact* f : {&f_q, &f_c}) {
    x.push_back(g.is_date(f->source()) ? 1.0 : 0.0);
    x.push_back(g.is_date(f->target()) ? 1.0 : 0.0);
    bool attr_date = f->is_attribute_fact(g) && g.is_date(f->target());
    x.push_back(attr_date ? 1.0 : 0.0);
  }
  {
    std::string rel = f_q.relationship(g);
    auto it = std::lower_bound(layout.rel_vocab.begin(), layout.rel_vocab.end(), rel);
    std::size_t hot =
        (it != layout.rel_vocab.end() && *it == rel)
            ? static_cast<std::size_t>(it - layout.rel_vocab.begin())
            : layout.rel_vocab.size();
    for (std::size_t i = 0; i < layout.rel_vocab.size(); ++i)
      x.push_back(i == hot ? 1.0 : 0.0);
  }

  check(x.size() == layout.length, "extract_features: layout length mismatch");
  return x;
}

}  // namespace factrank
