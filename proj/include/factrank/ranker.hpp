#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "factrank/autodiff.hpp"
#include "factrank/distant.hpp"
#include "factrank/enumerate.hpp"
#include "factrank/features.hpp"

namespace factrank {

// Ablation switches: LF keeps only the learned path features, HF keeps only
// the hand-crafted vector, NFCM uses both.
enum class FeatureMode : std::uint8_t { LF, HF, NFCM };

std::string feature_mode_name(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);

struct RankerConfig {
  int type_dim = 32;       // d_z; must equal pred_dim
  int pred_dim = 32;       // d_p
  int rnn_size = 32;
  double dropout_rate = 0.0;   // inverted dropout on the RNN output, training only
  int mlp_hidden_layers = 1;   // alpha
  int mlp_hidden_dim = 50;     // beta
  int negatives_per_batch = 10;  // k
  double learning_rate = 0.001;
  double l2_mlp_kernel = 0.0;
  std::uint64_t seed = 0;
  int epochs = 30;
  FeatureMode feature_mode = FeatureMode::NFCM;
  int top_types = 7;  // entity representation: sum of its most frequent types
  int distance_cap = kDefaultDistanceCap;
  EnumConfig enumeration;

  void validate() const;
};

// Embedding tables, RNN and MLP parameters plus Adam state. Vocabularies are
// stored by name so a checkpoint can be replayed against a compatible graph.
class RankerModel {
 public:
  RankerModel() = default;
  // Fresh model: vocabularies from the graph, relationship one-hot vocabulary
  // as given (fit on the training split), parameters uniform in [-0.05, 0.05]
  // from the seeded stream.
  static RankerModel init(const KnowledgeGraph& g, const RankerConfig& cfg,
                          const std::vector<std::string>& rel_vocab);

  RankerConfig config;
  std::vector<std::string> type_vocab;  // sorted, includes __UNK__
  std::vector<std::string> pred_vocab;  // sorted, includes __UNK__
  std::vector<std::string> rel_vocab;   // sorted relationship labels

  ad::Tensor w_types;      // |Z| x d_z
  ad::Tensor w_preds;      // |P| x d_p
  ad::Tensor w_preds_inv;  // |P| x d_p, inverse-direction predicate embeddings
  ad::Tensor w_hh;         // rnn x rnn
  ad::Tensor w_xh;         // rnn x d
  std::vector<ad::Tensor> mlp_kernels;  // alpha hidden layers + output layer
  std::vector<ad::Tensor> mlp_biases;

  std::vector<ad::Tensor*> tensors();
  std::vector<ad::Tensor*> mlp_kernel_tensors();
  std::size_t mlp_input_dim() const;
  std::size_t feature_dim() const { return kBaseFeatureCount + rel_vocab.size(); }

  int type_row(const std::string& name) const;  // __UNK__ row if absent
  int pred_row(const std::string& name) const;

  void save(const std::string& path) const;
  static RankerModel load(const std::string& path);

 private:
  static RankerModel load_json(std::istream& in, const std::string& path);
};

struct BatchExample {
  Fact query;
  Fact candidate;
  int label = 0;
};

// Binds a model to one graph: resolves embedding rows, runs the forward pass,
// computes the pairwise batch loss and its gradients, trains with Adam, and
// scores candidate lists. Scoring with frozen parameters is pure, but the
// instance keeps per-query caches, so use one Ranker per thread.
class Ranker {
 public:
  Ranker(RankerModel& model, const KnowledgeGraph& g);

  // Element-wise sum of the embeddings of the entity's most frequent types
  // (__UNK__ for typeless entities).
  std::vector<double> embed_entity(EntityId e);
  // Final RNN state over the embedded token sequence of a fact or path.
  std::vector<double> encode_fact(const Fact& f);
  std::vector<double> encode_path(const Path& p);
  // Element-wise sum of the encoded paths; the empty set encodes to zeros.
  std::vector<double> encode_path_set(const std::vector<Path>& paths);
  std::vector<double> encode_path_set(const PathSet& set) { return encode_path_set(set.paths); }

  // u(f_q, f_c) in [0, 1] with the hand-crafted vector x as given.
  double score(const Fact& f_q, const Fact& f_c, const std::vector<double>& x);
  // Convenience overload extracting x internally.
  double score(const Fact& f_q, const Fact& f_c);

  // Mean pairwise squared error over B x B, exactly as defined; batch items
  // must share one query fact.
  double batch_loss(const std::vector<BatchExample>& batch);
  // Forward + backward: accumulates parameter gradients and returns the loss.
  double batch_loss_backward(const std::vector<BatchExample>& batch);

  // Ranks candidates by score descending, ties broken by serialized fact.
  std::vector<std::pair<Fact, double>> rank(const Fact& f_q, const std::vector<Fact>& candidates);
  std::vector<std::pair<Fact, double>> rank(const CandidateSet& set) {
    return rank(set.query, set.candidates);
  }

  std::vector<double> features_for(const Fact& f_q, const Fact& f_c);
  const FeatureLayout& layout() const { return layout_; }
  const KnowledgeGraph& graph() const { return g_; }
  RankerModel& model() { return model_; }

 private:
  friend class Trainer;
  struct PathGroup {
    std::vector<std::pair<std::string, Path>> paths;  // (serialized, path), sorted
  };
  struct QueryPaths {
    std::map<EntityId, PathGroup> from_source;
    std::map<EntityId, PathGroup> from_target;
  };
  // Per-tape reuse of encoded paths and the query encoding across the items
  // of one batch.
  struct TapeCache {
    std::map<const Path*, ad::Var> path_vars;
    std::optional<ad::Var> query_var;
  };

  const QueryPaths& query_paths(const Fact& f_q);
  std::vector<const Path*> gather_paths(const std::map<EntityId, PathGroup>& side, const Fact& f_c);
  const std::vector<int>& entity_rows(EntityId e);

  ad::Var encode_sequence(ad::Tape& tape, const Path& path, std::mt19937_64* dropout_rng);
  ad::Var score_var(ad::Tape& tape, const Fact& f_q, const Fact& f_c,
                    const std::vector<double>& x, std::mt19937_64* dropout_rng, TapeCache* cache);
  ad::Var loss_var(ad::Tape& tape, const std::vector<ad::Var>& scores,
                   const std::vector<int>& labels);
  double batch_forward(const std::vector<BatchExample>& batch, std::mt19937_64* dropout_rng,
                       bool backward);

  // Tape-free forward pass mirroring score_var operation for operation.
  std::vector<double> fast_encode(const Path& path);
  double fast_mlp(const std::vector<double>& input) const;
  double fast_score(const std::vector<double>& v_q, const std::vector<double>& v_as,
                    const std::vector<double>& v_at, const std::vector<double>& x) const;

  RankerModel& model_;
  const KnowledgeGraph& g_;
  GraphStats stats_;
  FeatureLayout layout_;
  std::map<EntityId, std::vector<int>> entity_rows_cache_;
  std::map<Fact, QueryPaths> query_paths_cache_;
  std::map<Fact, DistanceCache> distance_caches_;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_ndcg5 = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;  // -1: no evaluable validation query; final weights kept
};

// End-to-end training on the distantly labeled dataset: per epoch, iterate
// query facts in shuffled order; per query, batch all positives plus k
// sampled negatives; Adam update with L2 on the MLP kernels; retain the
// weights of the best validation NDCG@5 epoch. on_epoch, when set, is called
// after each epoch with the fresh log entry.
TrainResult train(Ranker& ranker, const std::vector<LabeledInstance>& instances,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace factrank
