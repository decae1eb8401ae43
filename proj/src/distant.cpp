#include "factrank/distant.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace factrank {

Corpus load_corpus(const KnowledgeGraph& g, const std::string& path, CorpusLoadReport* report) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);

  CorpusLoadReport local;
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    EntityId source = kNoEntity;
    std::vector<std::vector<EntityId>> sentences;
    try {
      nlohmann::json j = nlohmann::json::parse(t);
      if (!j.contains("source_entity") || !j.contains("sentences"))
        throw DataError("document needs 'source_entity' and 'sentences'");
      source = g.entity(j["source_entity"].get<std::string>());
      if (source == kNoEntity) {
        local.unknown_entity_refs += 1;
        continue;  // a document we can never consult
      }
      for (const auto& sent : j["sentences"]) {
        std::vector<EntityId> mentions;
        for (const auto& m : sent) {
          EntityId e = g.entity(m.get<std::string>());
          if (e == kNoEntity) {
            local.unknown_entity_refs += 1;
            continue;
          }
          mentions.push_back(e);
        }
        sentences.push_back(std::move(mentions));
        local.sentences += 1;
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": invalid document: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto it = corpus.by_source.find(source);
    if (it != corpus.by_source.end()) {
      auto& doc = corpus.documents[it->second];
      doc.sentences.insert(doc.sentences.end(), sentences.begin(), sentences.end());
    } else {
      corpus.by_source.emplace(source, corpus.documents.size());
      corpus.documents.push_back(Document{source, std::move(sentences)});
      local.documents += 1;
    }
  }
  if (report) *report = local;
  return corpus;
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  throw InternalError("split_name: bad split");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw DataError("unknown split tag '" + s + "'");
}

LabelResult label_query_fact(const KnowledgeGraph& g, const Corpus& corpus, const Fact& f_q,
                             const CandidateSet& candidates, const LabelConfig& cfg) {
  LabelResult result;
  const Document* doc = corpus.document_for(f_q.source());
  if (doc == nullptr) return result;

  EntityId s = f_q.source();
  EntityId t = f_q.target();

  std::set<Fact> relevant;
  for (const auto& sentence : doc->sentences) {
    if (std::find(sentence.begin(), sentence.end(), t) == sentence.end()) continue;

    // O: the first max_cooccurring other entities, in mention order.
    std::vector<EntityId> others;
    for (EntityId e : sentence) {
      if (e == s || e == t) continue;
      if (std::find(others.begin(), others.end(), e) != others.end()) continue;
      others.push_back(e);
      if (others.size() >= cfg.max_cooccurring) break;
    }

    std::vector<EntityId> pool = others;
    pool.push_back(s);
    pool.push_back(t);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        if (pool[i] == pool[j]) continue;
        auto facts = direct_facts_between(g, pool[i], pool[j]);
        if (facts.size() == 1) {
          if (facts[0] != f_q) relevant.insert(facts[0]);
        } else if (facts.size() > 1) {
          result.ambiguous_pairs += 1;
        }
      }
    }
  }

  std::set<Fact> in_set(candidates.candidates.begin(), candidates.candidates.end());
  for (const Fact& f : relevant) {
    if (in_set.count(f))
      result.relevant.push_back(f);
    else
      result.outside_candidates += 1;
  }
  std::sort(result.relevant.begin(), result.relevant.end());
  return result;
}

std::vector<Fact> facts_of_relationship(const KnowledgeGraph& g, const std::string& relationship) {
  auto preds = split(relationship, '|');
  std::vector<Fact> out;
  if (preds.size() == 1) {
    PredicateId p = g.predicate(preds[0]);
    if (p < 0) return out;
    for (std::uint32_t i : g.pred_triples(p)) {
      if (auto f = Fact::try_make(g, {g.triple(i)})) out.push_back(*f);
    }
  } else if (preds.size() == 2) {
    PredicateId p0 = g.predicate(preds[0]);
    PredicateId p1 = g.predicate(preds[1]);
    if (p0 < 0 || p1 < 0) return out;
    for (std::uint32_t i : g.pred_triples(p0)) {
      const Triple& first = g.triple(i);
      if (!g.is_cvt(first.object)) continue;
      for (std::uint32_t j : g.out_triples(first.object)) {
        const Triple& second = g.triple(j);
        if (second.predicate != p1) continue;
        if (auto f = Fact::try_make(g, {first, second})) out.push_back(*f);
      }
    }
  } else {
    throw DataError("relationship label must have 1 or 2 predicates: '" + relationship + "'");
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> all_relationships(const KnowledgeGraph& g) {
  std::set<std::string> labels;
  for (const Triple& t : g.triples()) {
    if (auto f = Fact::try_make(g, {t})) labels.insert(f->relationship(g));
    if (g.is_cvt(t.object)) {
      for (std::uint32_t j : g.out_triples(t.object)) {
        if (auto f = Fact::try_make(g, {t, g.triple(j)})) labels.insert(f->relationship(g));
      }
    }
  }
  return std::vector<std::string>(labels.begin(), labels.end());
}

namespace {

struct LabeledQuery {
  Fact query;
  CandidateSet candidates;
  std::set<Fact> relevant;
  std::size_t outside = 0;
  std::size_t ambiguous = 0;
};

}  // namespace

Dataset build_dataset(const KnowledgeGraph& g, const Corpus& corpus,
                      const std::vector<std::string>& relationships, const DatasetConfig& cfg) {
  if (relationships.empty()) throw DataError("build_dataset: empty relationship set");
  std::vector<std::string> rels = relationships;
  std::sort(rels.begin(), rels.end());
  rels.erase(std::unique(rels.begin(), rels.end()), rels.end());

  Dataset out;
  std::map<Split, std::vector<std::size_t>> cand_counts;

  for (const std::string& rel : rels) {
    std::vector<Fact> queries = facts_of_relationship(g, rel);

    // Label every query fact of the relationship; keep the eligible ones.
    std::vector<LabeledQuery> labeled(queries.size());
    parallel_for(queries.size(), cfg.threads, [&](std::size_t i) {
      LabeledQuery& lq = labeled[i];
      lq.query = queries[i];
      lq.candidates = enumerate_candidates(g, queries[i], cfg.enumeration);
      LabelResult res = label_query_fact(g, corpus, queries[i], lq.candidates, cfg.label);
      lq.relevant.insert(res.relevant.begin(), res.relevant.end());
      lq.outside = res.outside_candidates;
      lq.ambiguous = res.ambiguous_pairs;
    });

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      out.stats.relevant_outside_candidates += labeled[i].outside;
      out.stats.ambiguous_pairs += labeled[i].ambiguous;
      if (!labeled[i].relevant.empty()) eligible.push_back(i);
    }
    if (eligible.empty()) continue;

    // Sample up to the cap, then split 70/10/20 (floor/floor/remainder).
    auto rng = rng_stream(cfg.seed, "dataset/" + rel);
    shuffle_vec(eligible, rng);
    if (eligible.size() > cfg.max_queries_per_relationship)
      eligible.resize(cfg.max_queries_per_relationship);

    std::size_t n = eligible.size();
    std::size_t n_train = static_cast<std::size_t>(0.7 * static_cast<double>(n));
    std::size_t n_val = static_cast<std::size_t>(0.1 * static_cast<double>(n));
    out.stats.queries_per_relationship[rel] = n;

    for (std::size_t pos = 0; pos < n; ++pos) {
      const LabeledQuery& lq = labeled[eligible[pos]];
      Split sp = pos < n_train ? Split::Train
                 : pos < n_train + n_val ? Split::Validation
                                         : Split::Test;
      cand_counts[sp].push_back(lq.candidates.candidates.size());
      for (const Fact& cand : lq.candidates.candidates) {
        int label = lq.relevant.count(cand) ? 1 : 0;
        out.instances.push_back(LabeledInstance{lq.query, cand, label, sp});
        out.stats.total_instances += 1;
        out.stats.positive_instances += static_cast<std::size_t>(label);
      }
    }
  }

  for (auto& [sp, counts] : cand_counts) {
    SplitStats st;
    st.query_facts = counts.size();
    if (!counts.empty()) {
      std::vector<std::size_t> sorted = counts;
      std::sort(sorted.begin(), sorted.end());
      st.cand_min = sorted.front();
      st.cand_max = sorted.back();
      double sum = 0.0;
      for (std::size_t c : sorted) sum += static_cast<double>(c);
      st.cand_avg = sum / static_cast<double>(sorted.size());
      std::size_t mid = sorted.size() / 2;
      st.cand_median = sorted.size() % 2 == 1
                           ? static_cast<double>(sorted[mid])
                           : (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
    }
    out.stats.per_split[split_name(sp)] = st;
  }
  out.stats.positive_rate =
      out.stats.total_instances == 0
          ? 0.0
          : static_cast<double>(out.stats.positive_instances) /
                static_cast<double>(out.stats.total_instances);
  return out;
}

std::string DatasetStats::to_json() const {
  nlohmann::json j;
  j["total_instances"] = total_instances;
  j["positive_instances"] = positive_instances;
  j["positive_rate"] = positive_rate;
  j["relevant_outside_candidates"] = relevant_outside_candidates;
  j["ambiguous_pairs_skipped"] = ambiguous_pairs;
  for (const auto& [rel, n] : queries_per_relationship) j["queries_per_relationship"][rel] = n;
  for (const auto& [name, st] : per_split) {
    nlohmann::json s;
    s["query_facts"] = st.query_facts;
    s["candidates_avg"] = st.cand_avg;
    s["candidates_median"] = st.cand_median;
    s["candidates_max"] = st.cand_max;
    s["candidates_min"] = st.cand_min;
    j["splits"][name] = s;
  }
  return j.dump(2) + "\n";
}

std::vector<QueryGroup> group_by_query(const std::vector<LabeledInstance>& instances, Split split) {
  std::vector<QueryGroup> groups;
  std::map<Fact, std::size_t> index;
  for (const auto& inst : instances) {
    if (inst.split != split) continue;
    auto it = index.find(inst.query);
    if (it == index.end()) {
      it = index.emplace(inst.query, groups.size()).first;
      groups.push_back(QueryGroup{inst.query, {}, {}});
    }
    groups[it->second].candidates.push_back(inst.candidate);
    groups[it->second].labels.push_back(inst.label);
  }
  return groups;
}

void write_dataset(const KnowledgeGraph& g, const std::vector<LabeledInstance>& instances,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw DataError("cannot write file: " + path);
  for (const auto& inst : instances) {
    out << split_name(inst.split) << '\t' << inst.label << '\t' << inst.query.serialize(g) << '\t'
        << inst.candidate.serialize(g) << '\n';
  }
}

std::vector<LabeledInstance> read_dataset(const KnowledgeGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);
  std::vector<LabeledInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    try {
      if (fields.size() < 2) throw DataError("expected at least 2 fields");
      LabeledInstance inst;
      inst.split = parse_split(fields[0]);
      if (fields[1] != "0" && fields[1] != "1") throw DataError("label must be 0 or 1");
      inst.label = fields[1] == "1" ? 1 : 0;
      std::size_t pos = 2;
      inst.query = parse_fact_fields(g, fields, pos);
      inst.candidate = parse_fact_fields(g, fields, pos);
      if (pos != fields.size()) throw DataError("trailing fields");
      out.push_back(std::move(inst));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace factrank
