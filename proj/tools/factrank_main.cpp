#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "factrank/baselines.hpp"
#include "factrank/config.hpp"
#include "factrank/distant.hpp"
#include "factrank/enumerate.hpp"
#include "factrank/kg.hpp"
#include "factrank/ranker.hpp"
#include "factrank/synth.hpp"

namespace fs = std::filesystem;
using namespace factrank;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Cli {
  std::string config_path;
  std::int64_t seed = -1;  // -1: keep config value
  int threads = -1;
  bool verbose = false;

  PipelineConfig load() const {
    PipelineConfig cfg =
        config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads >= 0) cfg.threads = threads;
    if (verbose) cfg.verbose = true;
    cfg.finalize();
    return cfg;
  }
};

KnowledgeGraph load_graph_checked(const PipelineConfig& cfg) {
  if (cfg.triples_path.empty() || cfg.entities_path.empty())
    throw DataError("config must set paths.triples and paths.entities");
  return load_graph(cfg.triples_path, cfg.entities_path);
}

std::vector<std::string> dataset_relationships(const KnowledgeGraph& g,
                                               const PipelineConfig& cfg) {
  if (!cfg.relationships.empty()) return cfg.relationships;
  return all_relationships(g);
}

std::vector<std::string> train_rel_vocab(const std::vector<LabeledInstance>& instances,
                                         const KnowledgeGraph& g) {
  std::set<std::string> rels;
  for (const auto& inst : instances)
    if (inst.split == Split::Train) rels.insert(inst.query.relationship(g));
  return {rels.begin(), rels.end()};
}

void write_text(const std::string& path, const std::string& text) {
  if (!fs::path(path).parent_path().empty()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw DataError("cannot write file: " + path);
  out << text;
}

int cmd_ingest(const Cli& cli) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  std::cout << "entities: " << g.num_entities() << "\n"
            << "predicates: " << g.num_predicates() << "\n"
            << "triples: " << g.num_triples() << "\n";
  if (!cfg.corpus_path.empty()) {
    CorpusLoadReport report;
    Corpus corpus = load_corpus(g, cfg.corpus_path, &report);
    std::cout << "corpus documents: " << report.documents << "\n"
              << "corpus sentences: " << report.sentences << "\n"
              << "corpus unknown entity references: " << report.unknown_entity_refs << "\n";
  }
  return 0;
}

int cmd_build_dataset(const Cli& cli) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  if (cfg.corpus_path.empty()) throw DataError("config must set paths.corpus");
  if (cfg.dataset_path.empty()) throw DataError("config must set paths.dataset");
  Corpus corpus = load_corpus(g, cfg.corpus_path, nullptr);

  Dataset ds = build_dataset(g, corpus, dataset_relationships(g, cfg), cfg.dataset);
  if (ds.instances.empty()) throw DataError("no eligible query facts: dataset is empty");

  if (!fs::path(cfg.dataset_path).parent_path().empty())
    fs::create_directories(fs::path(cfg.dataset_path).parent_path());
  write_dataset(g, ds.instances, cfg.dataset_path);
  if (!cfg.stats_path.empty()) write_text(cfg.stats_path, ds.stats.to_json());

  if (!cfg.features_path.empty()) {
    FeatureLayout layout = FeatureLayout::make(train_rel_vocab(ds.instances, g));
    GraphStats stats = GraphStats::compute(g);
    std::vector<std::string> rows(ds.instances.size());
    std::map<Fact, DistanceCache> caches;
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
      const auto& inst = ds.instances[i];
      DistanceCache& dc = caches[inst.query];
      auto x = extract_features(g, stats, inst.query, inst.candidate, layout, dc);
      std::string row = split_name(inst.split) + "\t" + std::to_string(inst.label) + "\t" +
                        inst.query.serialize(g) + "\t" + inst.candidate.serialize(g);
      char buf[32];
      for (double v : x) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        row += "\t";
        row += buf;
      }
      rows[i] = std::move(row);
    }
    std::string text;
    for (const auto& r : rows) {
      text += r;
      text += "\n";
    }
    write_text(cfg.features_path, text);
    std::string layout_path = cfg.features_layout_path.empty() ? cfg.features_path + ".layout.json"
                                                               : cfg.features_layout_path;
    write_text(layout_path, layout.to_json());
  }

  std::cout << "instances: " << ds.instances.size() << "\n"
            << "positive_rate: " << ds.stats.positive_rate << "\n";
  return 0;
}

int cmd_train(const Cli& cli, const std::string& mode_override) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  if (cfg.dataset_path.empty() || cfg.model_path.empty())
    throw DataError("config must set paths.dataset and paths.model");
  if (!mode_override.empty()) cfg.ranker.feature_mode = parse_feature_mode(mode_override);

  auto instances = read_dataset(g, cfg.dataset_path);
  RankerModel model = RankerModel::init(g, cfg.ranker, train_rel_vocab(instances, g));
  Ranker ranker(model, g);
  std::function<void(const EpochLog&)> on_epoch;
  if (cfg.verbose) {
    on_epoch = [](const EpochLog& e) {
      std::cerr << "epoch " << e.epoch << " loss " << e.mean_loss << " val_ndcg5 " << e.val_ndcg5
                << "\n";
    };
  }
  TrainResult result = train(ranker, instances, on_epoch);

  if (!fs::path(cfg.model_path).parent_path().empty())
    fs::create_directories(fs::path(cfg.model_path).parent_path());
  model.save(cfg.model_path);

  std::string log = "epoch\tmean_loss\tval_ndcg5\n";
  char buf[64];
  for (const auto& e : result.log) {
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\n", e.epoch, e.mean_loss, e.val_ndcg5);
    log += buf;
  }
  std::snprintf(buf, sizeof(buf), "best_epoch\t%d\n", result.best_epoch);
  log += buf;
  write_text(cfg.model_path + ".train_log.tsv", log);

  std::cout << "trained " << feature_mode_name(model.config.feature_mode) << ", best epoch "
            << result.best_epoch << "\n";
  return 0;
}

int cmd_rank(const Cli& cli, const std::string& model_override) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  std::string model_path = model_override.empty() ? cfg.model_path : model_override;
  if (cfg.dataset_path.empty() || model_path.empty() || cfg.runs_dir.empty())
    throw DataError("config must set paths.dataset, paths.model and paths.runs_dir");

  RankerModel model = RankerModel::load(model_path);
  auto instances = read_dataset(g, cfg.dataset_path);
  auto groups = group_by_query(instances, Split::Test);

  RankedRun run;
  std::string mode = feature_mode_name(model.config.feature_mode);
  std::transform(mode.begin(), mode.end(), mode.begin(), [](unsigned char c) { return std::tolower(c); });
  run.method = mode;
  run.queries.resize(groups.size());

  // Ranker keeps per-query caches, so each worker gets its own instance over
  // the shared frozen model; outputs are keyed by query index.
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(groups.size())));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        Ranker worker(model, g);
        for (std::size_t i = static_cast<std::size_t>(t); i < groups.size();
             i += static_cast<std::size_t>(threads)) {
          RankedQuery rq;
          rq.query = groups[i].query;
          rq.ranked = worker.rank(groups[i].query, groups[i].candidates);
          run.queries[i] = std::move(rq);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  fs::create_directories(cfg.runs_dir);
  std::string path = cfg.runs_dir + "/" + run.method + ".run.tsv";
  write_run(g, run, path);
  std::cout << "wrote " << path << " (" << run.queries.size() << " queries)\n";
  return 0;
}

int cmd_baseline(const Cli& cli) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  if (cfg.dataset_path.empty() || cfg.runs_dir.empty())
    throw DataError("config must set paths.dataset and paths.runs_dir");

  auto instances = read_dataset(g, cfg.dataset_path);
  auto groups = group_by_query(instances, Split::Test);
  GraphStats stats = GraphStats::compute(g);
  fs::create_directories(cfg.runs_dir);

  auto emit = [&](const std::string& method,
                  const std::function<double(const Fact&, const Fact&)>& fn) {
    RankedRun run = score_run(g, groups, method, fn, cfg.threads);
    write_run(g, run, cfg.runs_dir + "/" + method + ".run.tsv");
  };
  emit("fi", [&](const Fact& q, const Fact& c) { return baseline_fi(g, stats, q, c); });
  emit("aps", [&](const Fact& q, const Fact& c) { return baseline_aps(g, stats, q, c); });
  emit("aes", [&](const Fact& q, const Fact& c) { return baseline_aes(g, stats, q, c); });
  write_run(g, distsup_run(g, groups), cfg.runs_dir + "/distsup.run.tsv");

  std::cout << "wrote 4 baseline runs to " << cfg.runs_dir << "\n";
  return 0;
}

int cmd_evaluate(const Cli& cli) {
  PipelineConfig cfg = cli.load();
  KnowledgeGraph g = load_graph_checked(cfg);
  if (cfg.judgments_path.empty() || cfg.runs_dir.empty() || cfg.reports_dir.empty())
    throw DataError("config must set paths.judgments, paths.runs_dir and paths.reports_dir");

  Judgments judgments = read_judgments(g, cfg.judgments_path);
  if (!fs::is_directory(cfg.runs_dir)) throw DataError("runs directory not found: " + cfg.runs_dir);
  std::vector<std::string> run_files;
  for (const auto& entry : fs::directory_iterator(cfg.runs_dir)) {
    if (entry.path().extension() == ".tsv") run_files.push_back(entry.path().string());
  }
  std::sort(run_files.begin(), run_files.end());
  if (run_files.empty()) throw DataError("no .tsv run files in " + cfg.runs_dir);

  std::vector<RunEvaluation> evals;
  for (const auto& path : run_files)
    evals.push_back(evaluate_run(g, read_run(g, path), judgments));
  auto significance = significance_table(evals);

  fs::create_directories(cfg.reports_dir);
  std::string report_path = cfg.reports_dir + "/evaluation.json";
  write_text(report_path, evaluation_report_json(evals, significance));

  for (const auto& e : evals) {
    std::cout << e.method << "\tmap=" << e.map << "\tndcg5=" << e.ndcg5 << "\tndcg10=" << e.ndcg10
              << "\tmrr=" << e.mrr << "\tqueries=" << e.evaluated_queries << "\n";
  }
  std::cout << "wrote " << report_path << "\n";
  return 0;
}

int cmd_synth(const Cli& cli, const std::string& out_dir, const std::string& size) {
  PipelineConfig cfg = cli.load();
  SynthConfig synth_cfg;
  synth_cfg.seed = cfg.seed;
  synth_cfg.size = size;
  SynthWorld world = generate_synthetic_world(synth_cfg);
  write_synthetic_world(world, out_dir);
  std::cout << "entities: " << world.entities.size() << "\n"
            << "triples: " << world.triples.size() << "\n"
            << "documents: " << world.documents.size() << "\n"
            << "plants: " << world.plants.size() << "\n"
            << "wrote " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factrank: knowledge-graph fact contextualization pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Cli cli;
  app.add_option("--config", cli.config_path, "pipeline config file (TOML-style)");
  app.add_option("--seed", cli.seed, "override the root seed");
  app.add_option("--threads", cli.threads, "worker threads (1 = fully serial)");
  app.add_flag("--verbose", cli.verbose, "chatty progress output");

  auto* ingest = app.add_subcommand("ingest", "load and validate the graph and corpus");
  auto* build = app.add_subcommand("build-dataset", "distant-supervision labels, splits, stats");
  auto* train_cmd = app.add_subcommand("train", "train the ranker, write checkpoint + log");
  std::string mode_override;
  train_cmd->add_option("--feature-mode", mode_override, "LF | HF | NFCM (overrides config)");
  auto* rank_cmd = app.add_subcommand("rank", "rank test-split candidates with a checkpoint");
  std::string model_override;
  rank_cmd->add_option("--model", model_override, "checkpoint path (overrides config)");
  auto* baseline = app.add_subcommand("baseline", "write fi/aps/aes/distsup runs");
  auto* evaluate = app.add_subcommand("evaluate", "score runs against judgments, write report");
  auto* synth = app.add_subcommand("synth", "generate a synthetic world");
  std::string synth_out = "synth_world";
  std::string synth_size = "small";
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--size", synth_size, "small | tiny");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(cli);
    if (build->parsed()) return cmd_build_dataset(cli);
    if (train_cmd->parsed()) return cmd_train(cli, mode_override);
    if (rank_cmd->parsed()) return cmd_rank(cli, model_override);
    if (baseline->parsed()) return cmd_baseline(cli);
    if (evaluate->parsed()) return cmd_evaluate(cli);
    if (synth->parsed()) return cmd_synth(cli, synth_out, synth_size);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
