#include "factrank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "factrank/metrics.hpp"
#include "json.hpp"

namespace factrank {

std::string feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::LF: return "LF";
    case FeatureMode::HF: return "HF";
    case FeatureMode::NFCM: return "NFCM";
  }
  throw InternalError("feature_mode_name: bad mode");
}

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "LF") return FeatureMode::LF;
  if (s == "HF") return FeatureMode::HF;
  if (s == "NFCM") return FeatureMode::NFCM;
  throw DataError("unknown feature mode '" + s + "' (expected LF|HF|NFCM)");
}

void RankerConfig::validate() const {
  if (type_dim < 1 || pred_dim < 1 || rnn_size < 1 || mlp_hidden_dim < 1)
    throw DataError("ranker config: dimensions must be >= 1");
  if (type_dim != pred_dim)
    throw DataError("ranker config: type and predicate embedding dimensions must match");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw DataError("ranker config: dropout must be in [0, 1)");
  if (negatives_per_batch < 1) throw DataError("ranker config: negatives per batch must be >= 1");
  if (mlp_hidden_layers < 0) throw DataError("ranker config: hidden layer count must be >= 0");
  if (epochs < 1) throw DataError("ranker config: epochs must be >= 1");
  if (top_types < 1) throw DataError("ranker config: top_types must be >= 1");
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

std::size_t RankerModel::mlp_input_dim() const {
  std::size_t learned = 3 * static_cast<std::size_t>(config.rnn_size);
  switch (config.feature_mode) {
    case FeatureMode::LF: return learned;
    case FeatureMode::HF: return feature_dim();
    case FeatureMode::NFCM: return learned + feature_dim();
  }
  throw InternalError("mlp_input_dim: bad mode");
}

RankerModel RankerModel::init(const KnowledgeGraph& g, const RankerConfig& cfg,
                              const std::vector<std::string>& rel_vocab) {
  cfg.validate();
  RankerModel m;
  m.config = cfg;

  std::set<std::string> types{std::string(kUnkType)};
  for (std::size_t t = 0; t < g.num_types(); ++t) types.insert(g.type_name(static_cast<TypeId>(t)));
  m.type_vocab.assign(types.begin(), types.end());

  std::set<std::string> preds{std::string(kUnkType)};
  for (std::size_t p = 0; p < g.num_predicates(); ++p)
    preds.insert(g.predicate_name(static_cast<PredicateId>(p)));
  m.pred_vocab.assign(preds.begin(), preds.end());

  std::set<std::string> rels(rel_vocab.begin(), rel_vocab.end());
  m.rel_vocab.assign(rels.begin(), rels.end());

  int d = cfg.type_dim;
  m.w_types = ad::Tensor("w_types", static_cast<int>(m.type_vocab.size()), d);
  m.w_preds = ad::Tensor("w_preds", static_cast<int>(m.pred_vocab.size()), d);
  m.w_preds_inv = ad::Tensor("w_preds_inv", static_cast<int>(m.pred_vocab.size()), d);
  m.w_hh = ad::Tensor("w_hh", cfg.rnn_size, cfg.rnn_size);
  m.w_xh = ad::Tensor("w_xh", cfg.rnn_size, d);

  std::size_t in_dim = m.mlp_input_dim();
  for (int layer = 0; layer < cfg.mlp_hidden_layers; ++layer) {
    m.mlp_kernels.emplace_back("mlp_kernel_" + std::to_string(layer), cfg.mlp_hidden_dim,
                               static_cast<int>(in_dim));
    m.mlp_biases.emplace_back("mlp_bias_" + std::to_string(layer), cfg.mlp_hidden_dim, 1);
    in_dim = static_cast<std::size_t>(cfg.mlp_hidden_dim);
  }
  m.mlp_kernels.emplace_back("mlp_kernel_out", 1, static_cast<int>(in_dim));
  m.mlp_biases.emplace_back("mlp_bias_out", 1, 1);

  auto rng = rng_stream(cfg.seed, "init");
  for (ad::Tensor* t : m.tensors()) t->init_uniform(rng, 0.05);
  return m;
}

std::vector<ad::Tensor*> RankerModel::tensors() {
  std::vector<ad::Tensor*> out{&w_types, &w_preds, &w_preds_inv, &w_hh, &w_xh};
  for (auto& t : mlp_kernels) out.push_back(&t);
  for (auto& t : mlp_biases) out.push_back(&t);
  return out;
}

std::vector<ad::Tensor*> RankerModel::mlp_kernel_tensors() {
  std::vector<ad::Tensor*> out;
  for (auto& t : mlp_kernels) out.push_back(&t);
  return out;
}

namespace {

int vocab_row(const std::vector<std::string>& vocab, const std::string& name) {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), name);
  if (it != vocab.end() && *it == name) return static_cast<int>(it - vocab.begin());
  auto unk = std::lower_bound(vocab.begin(), vocab.end(), std::string(kUnkType));
  check(unk != vocab.end() && *unk == kUnkType, "vocabulary lacks the __UNK__ entry");
  return static_cast<int>(unk - vocab.begin());
}

}  // namespace

int RankerModel::type_row(const std::string& name) const { return vocab_row(type_vocab, name); }
int RankerModel::pred_row(const std::string& name) const { return vocab_row(pred_vocab, name); }

namespace {

nlohmann::json tensor_to_json(const ad::Tensor& t) {
  for (double v : t.value)
    if (!std::isfinite(v)) throw InternalError("checkpoint: non-finite parameter in " + t.name);
  nlohmann::json j;
  j["rows"] = t.rows;
  j["cols"] = t.cols;
  j["value"] = t.value;
  j["adam_m"] = t.adam_m;
  j["adam_v"] = t.adam_v;
  return j;
}

ad::Tensor tensor_from_json(const std::string& name, const nlohmann::json& j) {
  ad::Tensor t(name, j.at("rows").get<int>(), j.at("cols").get<int>());
  t.value = j.at("value").get<std::vector<double>>();
  t.adam_m = j.at("adam_m").get<std::vector<double>>();
  t.adam_v = j.at("adam_v").get<std::vector<double>>();
  std::size_t want = static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols);
  if (t.value.size() != want || t.adam_m.size() != want || t.adam_v.size() != want)
    throw DataError("checkpoint: tensor '" + name + "' has inconsistent shape");
  t.grad.assign(want, 0.0);
  return t;
}

}  // namespace

void RankerModel::save(const std::string& path) const {
  nlohmann::json j;
  j["format_version"] = 1;
  nlohmann::json c;
  c["type_dim"] = config.type_dim;
  c["pred_dim"] = config.pred_dim;
  c["rnn_size"] = config.rnn_size;
  c["dropout_rate"] = config.dropout_rate;
  c["mlp_hidden_layers"] = config.mlp_hidden_layers;
  c["mlp_hidden_dim"] = config.mlp_hidden_dim;
  c["negatives_per_batch"] = config.negatives_per_batch;
  c["learning_rate"] = config.learning_rate;
  c["l2_mlp_kernel"] = config.l2_mlp_kernel;
  c["seed"] = config.seed;
  c["epochs"] = config.epochs;
  c["feature_mode"] = feature_mode_name(config.feature_mode);
  c["top_types"] = config.top_types;
  c["distance_cap"] = config.distance_cap;
  c["max_candidates"] = config.enumeration.max_candidates;
  c["max_paths_per_pair"] = config.enumeration.max_paths_per_pair;
  j["config"] = c;
  j["type_vocab"] = type_vocab;
  j["pred_vocab"] = pred_vocab;
  j["rel_vocab"] = rel_vocab;

  RankerModel& self = const_cast<RankerModel&>(*this);
  for (ad::Tensor* t : self.tensors()) j["tensors"][t->name] = tensor_to_json(*t);

  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw DataError("cannot write file: " + path);
  out << j.dump(1) << "\n";
}

RankerModel RankerModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open file: " + path);
  try {
    return load_json(in, path);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path + "': " + e.what());
  }
}

RankerModel RankerModel::load_json(std::istream& in, const std::string& path) {
  nlohmann::json j;
  in >> j;
  if (j.value("format_version", 0) != 1)
    throw DataError("checkpoint '" + path + "': unsupported format version");

  RankerModel m;
  const auto& c = j.at("config");
  m.config.type_dim = c.at("type_dim").get<int>();
  m.config.pred_dim = c.at("pred_dim").get<int>();
  m.config.rnn_size = c.at("rnn_size").get<int>();
  m.config.dropout_rate = c.at("dropout_rate").get<double>();
  m.config.mlp_hidden_layers = c.at("mlp_hidden_layers").get<int>();
  m.config.mlp_hidden_dim = c.at("mlp_hidden_dim").get<int>();
  m.config.negatives_per_batch = c.at("negatives_per_batch").get<int>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.l2_mlp_kernel = c.at("l2_mlp_kernel").get<double>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.feature_mode = parse_feature_mode(c.at("feature_mode").get<std::string>());
  m.config.top_types = c.at("top_types").get<int>();
  m.config.distance_cap = c.at("distance_cap").get<int>();
  m.config.enumeration.max_candidates = c.at("max_candidates").get<std::size_t>();
  m.config.enumeration.max_paths_per_pair = c.at("max_paths_per_pair").get<std::size_t>();
  m.config.validate();

  m.type_vocab = j.at("type_vocab").get<std::vector<std::string>>();
  m.pred_vocab = j.at("pred_vocab").get<std::vector<std::string>>();
  m.rel_vocab = j.at("rel_vocab").get<std::vector<std::string>>();

  const auto& tensors = j.at("tensors");
  m.w_types = tensor_from_json("w_types", tensors.at("w_types"));
  m.w_preds = tensor_from_json("w_preds", tensors.at("w_preds"));
  m.w_preds_inv = tensor_from_json("w_preds_inv", tensors.at("w_preds_inv"));
  m.w_hh = tensor_from_json("w_hh", tensors.at("w_hh"));
  m.w_xh = tensor_from_json("w_xh", tensors.at("w_xh"));
  for (int layer = 0; layer < m.config.mlp_hidden_layers; ++layer) {
    std::string k = "mlp_kernel_" + std::to_string(layer);
    std::string b = "mlp_bias_" + std::to_string(layer);
    m.mlp_kernels.push_back(tensor_from_json(k, tensors.at(k)));
    m.mlp_biases.push_back(tensor_from_json(b, tensors.at(b)));
  }
  m.mlp_kernels.push_back(tensor_from_json("mlp_kernel_out", tensors.at("mlp_kernel_out")));
  m.mlp_biases.push_back(tensor_from_json("mlp_bias_out", tensors.at("mlp_bias_out")));

  if (static_cast<std::size_t>(m.mlp_kernels.front().cols) != m.mlp_input_dim())
    throw DataError("checkpoint '" + path + "': MLP input width does not match the config");
  if (m.w_xh.cols != m.config.type_dim || m.w_hh.rows != m.config.rnn_size)
    throw DataError("checkpoint '" + path + "': RNN shapes do not match the config");
  return m;
}

// ---------------------------------------------------------------------------
// Ranker: forward passes
// ---------------------------------------------------------------------------

Ranker::Ranker(RankerModel& model, const KnowledgeGraph& g)
    : model_(model), g_(g), stats_(GraphStats::compute(g)), layout_(FeatureLayout::make(model.rel_vocab)) {}

const std::vector<int>& Ranker::entity_rows(EntityId e) {
  auto it = entity_rows_cache_.find(e);
  if (it != entity_rows_cache_.end()) return it->second;
  std::vector<int> rows;
  for (TypeId t : g_.top_k_types(e, model_.config.top_types))
    rows.push_back(model_.type_row(g_.type_name(t)));
  if (rows.empty()) rows.push_back(model_.type_row(std::string(kUnkType)));
  return entity_rows_cache_.emplace(e, std::move(rows)).first->second;
}

const Ranker::QueryPaths& Ranker::query_paths(const Fact& f_q) {
  auto it = query_paths_cache_.find(f_q);
  if (it != query_paths_cache_.end()) return it->second;
  QueryPaths qp;
  auto build = [&](EntityId origin, std::map<EntityId, PathGroup>& sink) {
    for (auto& [dest, paths] : all_paths_from(g_, origin, model_.config.enumeration)) {
      PathGroup& group = sink[dest];
      for (auto& p : paths) group.paths.emplace_back(p.serialize(g_), p);
      std::sort(group.paths.begin(), group.paths.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    }
  };
  build(f_q.source(), qp.from_source);
  build(f_q.target(), qp.from_target);
  return query_paths_cache_.emplace(f_q, std::move(qp)).first->second;
}

// Paths from one origin to the candidate's entities, in the global
// lexicographic order connecting_paths produces.
std::vector<const Path*> Ranker::gather_paths(const std::map<EntityId, PathGroup>& side,
                                              const Fact& f_c) {
  auto dests = f_c.entities();
  std::sort(dests.begin(), dests.end());
  dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
  std::vector<std::pair<const std::string*, const Path*>> refs;
  for (EntityId dest : dests) {
    auto it = side.find(dest);
    if (it == side.end()) continue;
    for (const auto& [ser, path] : it->second.paths) refs.emplace_back(&ser, &path);
  }
  std::sort(refs.begin(), refs.end(),
            [](const auto& a, const auto& b) { return *a.first < *b.first; });
  std::vector<const Path*> out;
  out.reserve(refs.size());
  for (auto& [ser, path] : refs) out.push_back(path);
  return out;
}

ad::Var Ranker::encode_sequence(ad::Tape& tape, const Path& path, std::mt19937_64* dropout_rng) {
  check(!path.entities.empty(), "encode_sequence: empty sequence");
  ad::Var h = tape.zeros(static_cast<std::size_t>(model_.config.rnn_size));
  auto step = [&](ad::Var x) {
    h = tape.tanh(tape.add(tape.matvec(model_.w_hh, h), tape.matvec(model_.w_xh, x)));
  };
  step(tape.embed_sum(model_.w_types, entity_rows(path.entities[0])));
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const PathStep& ps = path.steps[i];
    int row = model_.pred_row(g_.predicate_name(ps.predicate));
    step(tape.embed_sum(ps.inverse ? model_.w_preds_inv : model_.w_preds, {row}));
    step(tape.embed_sum(model_.w_types, entity_rows(path.entities[i + 1])));
  }
  double rate = model_.config.dropout_rate;
  if (dropout_rng != nullptr && rate > 0.0) {
    std::vector<double> mask(h.dim());
    for (double& v : mask) v = uniform_unit(*dropout_rng) < rate ? 0.0 : 1.0 / (1.0 - rate);
    h = tape.mul_mask(h, std::move(mask));
  }
  return h;
}

ad::Var Ranker::score_var(ad::Tape& tape, const Fact& f_q, const Fact& f_c,
                          const std::vector<double>& x, std::mt19937_64* dropout_rng,
                          TapeCache* cache) {
  check(x.size() == model_.feature_dim(), "score: feature vector length mismatch");
  FeatureMode mode = model_.config.feature_mode;
  std::vector<ad::Var> parts;

  if (mode != FeatureMode::HF) {
    if (cache != nullptr && cache->query_var.has_value()) {
      parts.push_back(*cache->query_var);
    } else {
      ad::Var v_q = encode_sequence(tape, fact_as_path(f_q), dropout_rng);
      if (cache != nullptr) cache->query_var = v_q;
      parts.push_back(v_q);
    }
    const QueryPaths& qp = query_paths(f_q);
    auto encode_side = [&](const std::map<EntityId, PathGroup>& side) {
      auto paths = gather_paths(side, f_c);
      if (paths.empty()) return tape.zeros(static_cast<std::size_t>(model_.config.rnn_size));
      std::vector<ad::Var> encoded;
      encoded.reserve(paths.size());
      for (const Path* p : paths) {
        if (cache != nullptr) {
          auto it = cache->path_vars.find(p);
          if (it != cache->path_vars.end()) {
            encoded.push_back(it->second);
            continue;
          }
        }
        ad::Var v = encode_sequence(tape, *p, dropout_rng);
        if (cache != nullptr) cache->path_vars.emplace(p, v);
        encoded.push_back(v);
      }
      return tape.sum(encoded);
    };
    parts.push_back(encode_side(qp.from_source));
    parts.push_back(encode_side(qp.from_target));
  }
  if (mode != FeatureMode::LF) parts.push_back(tape.constant(x));

  ad::Var h = tape.concat(parts);
  std::size_t layers = model_.mlp_kernels.size();
  for (std::size_t i = 0; i + 1 < layers; ++i)
    h = tape.relu(tape.affine(model_.mlp_kernels[i], h, model_.mlp_biases[i]));
  h = tape.affine(model_.mlp_kernels[layers - 1], h, model_.mlp_biases[layers - 1]);
  return tape.sigmoid(h);
}

// ---------------------------------------------------------------------------
// Tape-free forward pass. Operation order mirrors score_var exactly so frozen
// scoring and the training-time forward agree bitwise.
// ---------------------------------------------------------------------------

namespace {

std::vector<double> fast_embed_sum(const ad::Tensor& w, const std::vector<int>& rows) {
  std::vector<double> v(static_cast<std::size_t>(w.cols), 0.0);
  for (int r : rows) {
    const double* src = w.row(r);
    for (int c = 0; c < w.cols; ++c) v[static_cast<std::size_t>(c)] += src[c];
  }
  return v;
}

std::vector<double> fast_matvec(const ad::Tensor& w, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(w.rows), 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

void add_inplace(std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

std::vector<double> Ranker::fast_encode(const Path& path) {
  check(!path.entities.empty(), "encode: empty sequence");
  std::vector<double> h(static_cast<std::size_t>(model_.config.rnn_size), 0.0);
  auto step = [&](const std::vector<double>& x) {
    std::vector<double> pre = fast_matvec(model_.w_hh, h);
    add_inplace(pre, fast_matvec(model_.w_xh, x));
    for (double& v : pre) v = std::tanh(v);
    h = std::move(pre);
  };
  step(fast_embed_sum(model_.w_types, entity_rows(path.entities[0])));
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const PathStep& ps = path.steps[i];
    int row = model_.pred_row(g_.predicate_name(ps.predicate));
    step(fast_embed_sum(ps.inverse ? model_.w_preds_inv : model_.w_preds, {row}));
    step(fast_embed_sum(model_.w_types, entity_rows(path.entities[i + 1])));
  }
  return h;
}

double Ranker::fast_mlp(const std::vector<double>& input) const {
  std::vector<double> h = input;
  std::size_t layers = model_.mlp_kernels.size();
  auto layer = [&](const ad::Tensor& w, const ad::Tensor& b) {
    std::vector<double> y(static_cast<std::size_t>(w.rows), 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double* wr = w.row(r);
      double acc = b.value[static_cast<std::size_t>(r)];
      for (int c = 0; c < w.cols; ++c) acc += wr[c] * h[static_cast<std::size_t>(c)];
      y[static_cast<std::size_t>(r)] = acc;
    }
    return y;
  };
  for (std::size_t i = 0; i + 1 < layers; ++i) {
    h = layer(model_.mlp_kernels[i], model_.mlp_biases[i]);
    for (double& v : h) v = v > 0.0 ? v : 0.0;
  }
  h = layer(model_.mlp_kernels[layers - 1], model_.mlp_biases[layers - 1]);
  return 1.0 / (1.0 + std::exp(-h[0]));
}

double Ranker::fast_score(const std::vector<double>& v_q, const std::vector<double>& v_as,
                          const std::vector<double>& v_at, const std::vector<double>& x) const {
  std::vector<double> input;
  FeatureMode mode = model_.config.feature_mode;
  if (mode != FeatureMode::HF) {
    input.insert(input.end(), v_q.begin(), v_q.end());
    input.insert(input.end(), v_as.begin(), v_as.end());
    input.insert(input.end(), v_at.begin(), v_at.end());
  }
  if (mode != FeatureMode::LF) input.insert(input.end(), x.begin(), x.end());
  return fast_mlp(input);
}

std::vector<double> Ranker::embed_entity(EntityId e) {
  return fast_embed_sum(model_.w_types, entity_rows(e));
}

std::vector<double> Ranker::encode_fact(const Fact& f) { return fast_encode(fact_as_path(f)); }

std::vector<double> Ranker::encode_path(const Path& p) { return fast_encode(p); }

std::vector<double> Ranker::encode_path_set(const std::vector<Path>& paths) {
  std::vector<double> acc(static_cast<std::size_t>(model_.config.rnn_size), 0.0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i == 0)
      acc = fast_encode(paths[i]);
    else
      add_inplace(acc, fast_encode(paths[i]));
  }
  return acc;
}

ad::Var Ranker::loss_var(ad::Tape& tape, const std::vector<ad::Var>& scores,
                         const std::vector<int>& labels) {
  check(scores.size() == labels.size() && !scores.empty(), "loss: empty or mismatched batch");
  std::vector<ad::Var> terms;
  terms.reserve(scores.size() * scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      double label_diff = static_cast<double>(labels[i] - labels[j]);
      ad::Var score_diff = tape.sub(scores[i], scores[j]);
      terms.push_back(tape.square(tape.affine_scalar(label_diff, -1.0, score_diff)));
    }
  }
  return tape.affine_scalar(0.0, 1.0 / static_cast<double>(scores.size()), tape.sum(terms));
}

namespace {

void check_batch(const std::vector<BatchExample>& batch) {
  if (batch.empty()) throw DataError("batch_loss: empty batch");
  for (const auto& ex : batch)
    if (!(ex.query == batch.front().query))
      throw DataError("batch_loss: batch mixes query facts");
}

}  // namespace

double Ranker::batch_forward(const std::vector<BatchExample>& batch, std::mt19937_64* dropout_rng,
                             bool backward) {
  check_batch(batch);
  bool wants_features = model_.config.feature_mode != FeatureMode::LF;
  std::vector<double> unused(model_.feature_dim(), 0.0);
  ad::Tape tape;
  TapeCache cache;
  std::vector<ad::Var> scores;
  std::vector<int> labels;
  for (const auto& ex : batch) {
    auto x = wants_features ? features_for(ex.query, ex.candidate) : unused;
    scores.push_back(score_var(tape, ex.query, ex.candidate, x, dropout_rng, &cache));
    labels.push_back(ex.label);
  }
  ad::Var loss = loss_var(tape, scores, labels);
  if (backward) tape.backward(loss);
  return loss.scalar();
}

double Ranker::batch_loss(const std::vector<BatchExample>& batch) {
  return batch_forward(batch, nullptr, false);
}

double Ranker::batch_loss_backward(const std::vector<BatchExample>& batch) {
  return batch_forward(batch, nullptr, true);
}

std::vector<double> Ranker::features_for(const Fact& f_q, const Fact& f_c) {
  DistanceCache& dc = distance_caches_[f_q];
  dc.d_max = model_.config.distance_cap;
  return extract_features(g_, stats_, f_q, f_c, layout_, dc);
}

double Ranker::score(const Fact& f_q, const Fact& f_c, const std::vector<double>& x) {
  check(x.size() == model_.feature_dim(), "score: feature vector length mismatch");
  std::vector<double> v_q, v_as, v_at;
  if (model_.config.feature_mode != FeatureMode::HF) {
    v_q = fast_encode(fact_as_path(f_q));
    const QueryPaths& qp = query_paths(f_q);
    auto sum_side = [&](const std::map<EntityId, PathGroup>& side) {
      auto paths = gather_paths(side, f_c);
      std::vector<double> acc(static_cast<std::size_t>(model_.config.rnn_size), 0.0);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        if (i == 0)
          acc = fast_encode(*paths[i]);
        else
          add_inplace(acc, fast_encode(*paths[i]));
      }
      return acc;
    };
    v_as = sum_side(qp.from_source);
    v_at = sum_side(qp.from_target);
  }
  return fast_score(v_q, v_as, v_at, x);
}

double Ranker::score(const Fact& f_q, const Fact& f_c) {
  return score(f_q, f_c, features_for(f_q, f_c));
}

std::vector<std::pair<Fact, double>> Ranker::rank(const Fact& f_q,
                                                  const std::vector<Fact>& candidates) {
  std::vector<std::pair<Fact, double>> scored;
  scored.reserve(candidates.size());

  if (model_.config.feature_mode == FeatureMode::HF) {
    for (const Fact& c : candidates) scored.emplace_back(c, score(f_q, c));
  } else {
    // Encode the query and each distinct connecting path once for the whole
    // candidate list.
    std::vector<double> v_q = fast_encode(fact_as_path(f_q));
    const QueryPaths& qp = query_paths(f_q);
    std::map<const Path*, std::vector<double>> encoded;
    auto sum_side = [&](const std::map<EntityId, PathGroup>& side, const Fact& f_c) {
      auto paths = gather_paths(side, f_c);
      std::vector<double> acc(static_cast<std::size_t>(model_.config.rnn_size), 0.0);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        auto it = encoded.find(paths[i]);
        if (it == encoded.end()) it = encoded.emplace(paths[i], fast_encode(*paths[i])).first;
        if (i == 0)
          acc = it->second;
        else
          add_inplace(acc, it->second);
      }
      return acc;
    };
    bool wants_features = model_.config.feature_mode != FeatureMode::LF;
    std::vector<double> unused(model_.feature_dim(), 0.0);
    for (const Fact& c : candidates) {
      auto x = wants_features ? features_for(f_q, c) : unused;
      scored.emplace_back(c, fast_score(v_q, sum_side(qp.from_source, c),
                                        sum_side(qp.from_target, c), x));
    }
  }

  std::sort(scored.begin(), scored.end(), [this](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first.serialize(g_) < b.first.serialize(g_);
  });
  return scored;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

class Trainer {
 public:
  Trainer(Ranker& ranker, const std::vector<LabeledInstance>& instances,
          std::function<void(const EpochLog&)> on_epoch)
      : on_epoch_(std::move(on_epoch)),
        ranker_(ranker),
        cfg_(ranker.model_.config),
        train_(group_by_query(instances, Split::Train)),
        val_(group_by_query(instances, Split::Validation)) {}

  TrainResult run() {
    bool any_positive = false;
    for (const auto& g : train_)
      for (int l : g.labels) any_positive = any_positive || l == 1;
    if (!any_positive) throw DataError("train: dataset has no positive instances");

    auto order_rng = rng_stream(cfg_.seed, "train/order");
    auto negative_rng = rng_stream(cfg_.seed, "train/negatives");
    auto dropout_rng = rng_stream(cfg_.seed, "train/dropout");
    ad::Adam adam(ad::AdamConfig{cfg_.learning_rate, 0.9, 0.999, 1e-8});

    auto tensors = ranker_.model_.tensors();
    std::vector<std::pair<ad::Tensor*, double>> l2_terms;
    if (cfg_.l2_mlp_kernel > 0.0)
      for (ad::Tensor* t : ranker_.model_.mlp_kernel_tensors())
        l2_terms.emplace_back(t, cfg_.l2_mlp_kernel);

    TrainResult result;
    double best_val = -1.0;
    std::vector<std::vector<double>> best_values, best_m, best_v;

    std::vector<std::size_t> order(train_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      shuffle_vec(order, order_rng);
      double loss_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t qi : order) {
        const QueryGroup& group = train_[qi];
        auto batch = make_batch(group, negative_rng);
        if (batch.empty()) continue;
        for (ad::Tensor* t : tensors) t->zero_grad();
        loss_sum += step_loss(batch, &dropout_rng);
        adam.step(tensors, l2_terms);
        batches += 1;
      }

      EpochLog log;
      log.epoch = epoch;
      log.mean_loss = batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches);
      log.val_ndcg5 = validation_ndcg5();
      result.log.push_back(log);
      if (on_epoch_) on_epoch_(log);

      if (log.val_ndcg5 > best_val && has_evaluable_validation()) {
        best_val = log.val_ndcg5;
        result.best_epoch = epoch;
        snapshot(tensors, best_values, best_m, best_v);
      }
    }

    if (result.best_epoch >= 0) restore(tensors, best_values, best_m, best_v);
    return result;
  }

 private:
  std::vector<BatchExample> make_batch(const QueryGroup& group, std::mt19937_64& rng) {
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < group.labels.size(); ++i)
      (group.labels[i] == 1 ? positives : negatives).push_back(i);
    if (positives.empty()) return {};  // no pairwise signal

    std::vector<BatchExample> batch;
    for (std::size_t i : positives)
      batch.push_back(BatchExample{group.query, group.candidates[i], 1});
    std::size_t k = static_cast<std::size_t>(cfg_.negatives_per_batch);
    for (std::size_t pick : sample_without_replacement(rng, negatives.size(), k))
      batch.push_back(BatchExample{group.query, group.candidates[negatives[pick]], 0});
    return batch;
  }

  double step_loss(const std::vector<BatchExample>& batch, std::mt19937_64* dropout_rng) {
    return ranker_.batch_forward(batch, dropout_rng, true);
  }

  bool has_evaluable_validation() {
    for (const auto& g : val_)
      for (int l : g.labels)
        if (l == 1) return true;
    return false;
  }

  double validation_ndcg5() {
    double acc = 0.0;
    std::size_t counted = 0;
    for (const auto& group : val_) {
      bool has_pos = std::find(group.labels.begin(), group.labels.end(), 1) != group.labels.end();
      if (!has_pos) continue;
      std::map<Fact, int> label_of;
      for (std::size_t i = 0; i < group.candidates.size(); ++i)
        label_of[group.candidates[i]] = group.labels[i];
      auto ranked = ranker_.rank(group.query, group.candidates);
      std::vector<int> grades;
      grades.reserve(ranked.size());
      for (const auto& [fact, score] : ranked) grades.push_back(label_of[fact]);
      acc += ndcg_at(grades, 5);
      counted += 1;
    }
    return counted == 0 ? 0.0 : acc / static_cast<double>(counted);
  }

  void snapshot(const std::vector<ad::Tensor*>& tensors, std::vector<std::vector<double>>& values,
                std::vector<std::vector<double>>& m, std::vector<std::vector<double>>& v) {
    values.clear();
    m.clear();
    v.clear();
    for (ad::Tensor* t : tensors) {
      values.push_back(t->value);
      m.push_back(t->adam_m);
      v.push_back(t->adam_v);
    }
  }

  void restore(const std::vector<ad::Tensor*>& tensors,
               const std::vector<std::vector<double>>& values,
               const std::vector<std::vector<double>>& m,
               const std::vector<std::vector<double>>& v) {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      tensors[i]->value = values[i];
      tensors[i]->adam_m = m[i];
      tensors[i]->adam_v = v[i];
    }
  }

  std::function<void(const EpochLog&)> on_epoch_;
  Ranker& ranker_;
  const RankerConfig& cfg_;
  std::vector<QueryGroup> train_;
  std::vector<QueryGroup> val_;
};

TrainResult train(Ranker& ranker, const std::vector<LabeledInstance>& instances,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  return Trainer(ranker, instances, on_epoch).run();
}

}  // namespace factrank
