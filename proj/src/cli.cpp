#include "holgraph/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "holgraph/corpus.hpp"
#include "holgraph/graph.hpp"
#include "holgraph/model.hpp"
#include "holgraph/prover.hpp"
#include "holgraph/sexpr.hpp"
#include "holgraph/training.hpp"

namespace holgraph {

namespace {

// Removes registered files unless the command completes.
class OutputGuard {
 public:
  void add(const std::string& path) {
    if (!path.empty()) paths_.push_back(path);
  }
  void commit() { paths_.clear(); }
  ~OutputGuard() {
    for (const auto& p : paths_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }

 private:
  std::vector<std::string> paths_;
};

struct RepresentationFlags {
  std::string representation = "subexpr";
  bool blind = false;
  bool random_edges = false;
  std::string direction = "both";

  void add_to(CLI::App* app, bool with_random_edges = true) {
    app->add_option("--representation", representation, "Term sharing: ast, leaf or subexpr")
        ->check(CLI::IsMember({"ast", "leaf", "subexpr"}))
        ->capture_default_str();
    app->add_flag("--blind-variables", blind, "Rename every variable to x");
    if (with_random_edges) app->add_flag("--random-edges", random_edges, "Add 3 random edges per node");
    app->add_option("--direction", direction, "Message flow: both, topdown or bottomup")
        ->check(CLI::IsMember({"both", "topdown", "bottomup"}))
        ->capture_default_str();
  }

  RepresentationConfig config(std::uint64_t seed) const {
    RepresentationConfig c;
    c.sharing = parse_sharing(representation);
    c.variable_blinding = blind;
    c.random_edges = random_edges;
    c.direction = parse_direction(direction);
    c.random_seed = seed;
    validate(c);
    return c;
  }
};

std::vector<SExpr> read_terms(const std::string& input, const std::vector<std::string>& exprs) {
  std::vector<SExpr> terms;
  for (const auto& e : exprs) terms.push_back(parse(e));
  if (input.empty()) {
    if (exprs.empty()) throw std::invalid_argument("no input: pass --expr or a file ('-' for stdin)");
    return terms;
  }
  std::ifstream file;
  std::istream* in = &std::cin;
  if (input != "-") {
    file.open(input);
    if (!file) throw std::runtime_error("cannot open " + input);
    in = &file;
  }
  std::string line;
  for (std::size_t n = 1; std::getline(*in, line); ++n) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    try {
      terms.push_back(parse(line));
    } catch (const ParseError& e) {
      throw std::runtime_error(input + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return terms;
}

// Writes to `path` or to `fallback` when the path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& fallback, OutputGuard& guard, F&& f) {
  if (path.empty() || path == "-") {
    f(fallback);
    return;
  }
  guard.add(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  f(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

struct ModelFlags {
  int hops = 2;
  std::size_t token_dim = 128, node_dim = 128, hidden_dim = 256;
  std::vector<std::size_t> pool_widths{512, 1024};
  std::vector<std::size_t> tactic_widths{512, 256};
  std::vector<std::size_t> combiner_widths{1024, 512};
  double mlp_keep = 0.5, pool_keep = 0.5, head_keep = 0.7;
  double tactic_weight = 1.0, pairwise_weight = 0.2, aucroc_weight = 4.0;
  std::size_t goals = 16, negatives = 15, tactics = 41;

  void add_to(CLI::App* app) {
    app->add_option("--hops", hops, "Message-passing rounds (0, 2, 4, 8, 12 in the reference setups)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--token-dim", token_dim, "Token embedding size")->capture_default_str();
    app->add_option("--node-dim", node_dim, "Node embedding size")->capture_default_str();
    app->add_option("--hidden-dim", hidden_dim, "Hidden width of the GNN MLPs")->capture_default_str();
    app->add_option("--pool-widths", pool_widths, "Per-node projection widths before max pooling")
        ->capture_default_str();
    app->add_option("--tactic-widths", tactic_widths, "Hidden widths of the tactic classifier")
        ->capture_default_str();
    app->add_option("--combiner-widths", combiner_widths, "Hidden widths of the combiner")->capture_default_str();
    app->add_option("--mlp-keep", mlp_keep, "Dropout keep probability inside GNN MLPs")->capture_default_str();
    app->add_option("--pool-keep", pool_keep, "Dropout keep probability in the pooling layers")
        ->capture_default_str();
    app->add_option("--head-keep", head_keep, "Dropout keep probability before head layers")
        ->capture_default_str();
    app->add_option("--tactic-weight", tactic_weight, "Tactic cross-entropy weight")->capture_default_str();
    app->add_option("--pairwise-weight", pairwise_weight, "Pairwise sigmoid cross-entropy weight")
        ->capture_default_str();
    app->add_option("--aucroc-weight", aucroc_weight, "AUCROC loss weight")->capture_default_str();
    app->add_option("--goals-per-batch", goals, "Positive goals per batch")->capture_default_str();
    app->add_option("--negatives-per-goal", negatives, "Sampled negatives per goal")->capture_default_str();
    app->add_option("--tactics", tactics, "Tactic classes")->capture_default_str();
  }

  ModelConfig config(const RepresentationConfig& representation) const {
    ModelConfig c;
    c.representation = representation;
    c.gnn.hops = hops;
    c.gnn.token_dim = token_dim;
    c.gnn.node_dim = node_dim;
    c.gnn.hidden_dim = hidden_dim;
    c.gnn.pool_widths = pool_widths;
    c.gnn.mlp_keep = mlp_keep;
    c.gnn.pool_keep = pool_keep;
    c.tactic_count = tactics;
    c.tactic_widths = tactic_widths;
    c.combiner_widths = combiner_widths;
    c.head_keep = head_keep;
    c.loss = {tactic_weight, pairwise_weight, aucroc_weight};
    c.goals_per_batch = goals;
    c.negatives_per_goal = negatives;
    return c;
  }
};

struct Histogram {
  std::size_t bin_width;
  std::map<std::size_t, std::map<std::string, std::size_t>> bins;

  void add(const std::string& column, std::size_t value) { ++bins[value / bin_width][column]; }

  void print(std::ostream& out, const std::string& title, const std::vector<std::string>& columns) const {
    out << title << " (bin width " << bin_width << ")\n" << std::left << std::setw(12) << "bin";
    for (const auto& c : columns) out << std::right << std::setw(10) << c;
    out << '\n';
    for (const auto& [bin, counts] : bins) {
      std::ostringstream label;
      label << bin * bin_width << '-' << (bin + 1) * bin_width - 1;
      out << std::left << std::setw(12) << label.str();
      for (const auto& c : columns) {
        auto it = counts.find(c);
        out << std::right << std::setw(10) << (it == counts.end() ? 0 : it->second);
      }
      out << '\n';
    }
  }
};

int cmd_stats(const std::vector<SExpr>& terms, bool blind, std::size_t bin_width, const std::string& csv,
              std::ostream& out, OutputGuard& guard) {
  if (bin_width == 0) throw std::invalid_argument("--bin-width must be positive");
  const std::vector<std::pair<std::string, Sharing>> reps = {
      {"ast", Sharing::None}, {"leaf", Sharing::Leaf}, {"subexpr", Sharing::Subexpression}};
  std::vector<std::string> names;
  Histogram nodes{bin_width, {}}, depths{bin_width, {}};
  std::vector<std::vector<GraphStats>> all(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    names.push_back(reps[r].first);
    RepresentationConfig c;
    c.sharing = reps[r].second;
    c.variable_blinding = blind;
    for (const auto& t : terms) {
      const GraphStats s = stats(make_graph(t, c));
      all[r].push_back(s);
      nodes.add(reps[r].first, s.node_count);
      depths.add(reps[r].first, s.depth);
    }
  }
  out << std::left << std::setw(12) << "graph" << std::right << std::setw(8) << "terms" << std::setw(12)
      << "mean_nodes" << std::setw(12) << "mean_edges" << std::setw(12) << "mean_depth" << std::setw(10)
      << "max_nodes" << std::setw(10) << "max_depth" << '\n';
  for (std::size_t r = 0; r < reps.size(); ++r) {
    double n = 0, e = 0, d = 0;
    std::size_t max_n = 0, max_d = 0;
    for (const auto& s : all[r]) {
      n += static_cast<double>(s.node_count);
      e += static_cast<double>(s.edge_count);
      d += static_cast<double>(s.depth);
      max_n = std::max(max_n, s.node_count);
      max_d = std::max(max_d, s.depth);
    }
    const double k = static_cast<double>(terms.size());
    out << std::left << std::setw(12) << reps[r].first << std::right << std::setw(8) << terms.size() << std::fixed
        << std::setprecision(2) << std::setw(12) << n / k << std::setw(12) << e / k << std::setw(12) << d / k
        << std::setw(10) << max_n << std::setw(10) << max_d << '\n';
  }
  out.unsetf(std::ios::fixed);
  out << '\n';
  nodes.print(out, "node count", names);
  out << '\n';
  depths.print(out, "depth", names);
  if (!csv.empty()) {
    emit(csv, out, guard, [&](std::ostream& f) {
      f << "graph,term,nodes,edges,depth\n";
      for (std::size_t r = 0; r < reps.size(); ++r) {
        for (std::size_t i = 0; i < all[r].size(); ++i) {
          f << reps[r].first << ',' << i << ',' << all[r][i].node_count << ',' << all[r][i].edge_count << ','
            << all[r][i].depth << '\n';
        }
      }
    });
  }
  return 0;
}

// Splits the training theorems into a training part and a held-out part used
// for checkpoint selection.
std::pair<ProofLog, ProofLog> holdout_split(const ProofLog& train, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> theorems;
  for (const auto& s : train) {
    if (theorems.empty() || theorems.back() != s.theorem) theorems.push_back(s.theorem);
  }
  std::sort(theorems.begin(), theorems.end());
  theorems.erase(std::unique(theorems.begin(), theorems.end()), theorems.end());
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(theorems.begin(), theorems.end(), rng);
  const auto held = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(theorems.size()) + 0.5));
  if (held >= theorems.size()) throw std::invalid_argument("too few training theorems for a held-out split");
  std::vector<bool> is_held(theorems.empty() ? 0 : *std::max_element(theorems.begin(), theorems.end()) + 1);
  for (std::size_t i = 0; i < held; ++i) is_held[theorems[i]] = true;
  ProofLog keep, out;
  for (const auto& s : train) (is_held[s.theorem] ? out : keep).push_back(s);
  return {keep, out};
}

template <typename T>
void run_train(const TrainConfig& config, const TheoremDb& db, const ProofLog& train_steps,
               const ProofLog& eval_steps, const std::string& checkpoint, const std::string& state,
               std::ostream& out, std::ostream* metrics_file) {
  struct Tee : std::streambuf {
    std::streambuf *a, *b;
    int overflow(int c) override {
      if (c == EOF) return 0;
      if (a->sputc(static_cast<char>(c)) == EOF) return EOF;
      if (b && b->sputc(static_cast<char>(c)) == EOF) return EOF;
      return c;
    }
    int sync() override { return a->pubsync() | (b ? b->pubsync() : 0); }
  } tee;
  tee.a = out.rdbuf();
  tee.b = metrics_file ? metrics_file->rdbuf() : nullptr;
  std::ostream log(&tee);
  log << "config " << to_json(config).dump() << '\n';
  log << "examples train " << train_steps.size() << " eval " << eval_steps.size() << '\n';
  const TrainResult<T> result = train<T>(config, db, train_steps, eval_steps, &log);
  const MetricRecord* best = nullptr;
  for (const auto& m : result.metrics) {
    if (!best || m.selection_score() > best->selection_score()) best = &m;
  }
  nlohmann::json extra = {{"train", to_json(config)}, {"steps_run", result.steps_run}};
  if (best) {
    extra["selected"] = {{"step", best->step},
                         {"tactic_accuracy", best->tactic_accuracy},
                         {"premise_accuracy", best->premise_accuracy}};
    log << "selected step " << best->step << '\n';
  }
  log.flush();
  save_training_checkpoint<T>(checkpoint, result.selected, nullptr, extra);
  if (!state.empty()) save_training_checkpoint<T>(state, result.live, &result.optimizer, extra);
}

template <typename T>
void run_eval(const std::string& checkpoint, ParamSource source, const TheoremDb& db, const ProofLog& steps,
              std::uint64_t seed, std::ostream& out) {
  const Model<T> model = load_model<T>(checkpoint, source);
  const MetricRecord m = evaluate_metrics(model, db, steps, seed);
  out << std::setprecision(6) << "examples " << steps.size() << '\n'
      << "tactic_accuracy " << m.tactic_accuracy << '\n'
      << "relative_premise_accuracy " << m.premise_accuracy << '\n';
}

template <typename T>
EvaluationReport run_model_prover(const std::string& checkpoint, ParamSource source, const TheoremDb& db,
                                  std::span<const std::size_t> theorems, const ProverConfig& config,
                                  const std::string& cache_path, OutputGuard& guard, std::ostream& err) {
  const Model<T> model = load_model<T>(checkpoint, source);
  const std::vector<SExpr> statements = db.statements();
  std::vector<std::size_t> all(db.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::optional<PremiseCache<T>> cache;
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    try {
      cache = load_premise_cache<T>(cache_path, model_identity(model));
      if (cache->indices != all) cache.reset();
    } catch (const std::exception& e) {
      err << "premise cache ignored: " << e.what() << '\n';
    }
  }
  if (!cache) {
    cache = build_premise_cache(model, all, statements);
    if (!cache_path.empty()) {
      guard.add(cache_path);
      save_premise_cache(cache_path, *cache);
    }
  }
  NeuralPolicy<T> policy(model, statements, &*cache);
  return evaluate_prover(db, theorems, policy, config);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HOL term graphs, graph neural premise selection and toy proof search", "holgraph"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "holgraph 0.1.0");

  // parse
  std::string input;
  std::vector<std::string> exprs;
  auto* parse_cmd = app.add_subcommand("parse", "Echo S-expressions in canonical form");
  parse_cmd->add_option("input", input, "File with one term per line, '-' for stdin");
  parse_cmd->add_option("--expr", exprs, "Term given on the command line");

  // graphify
  RepresentationFlags rep;
  std::uint64_t seed = 0;
  std::string output;
  auto* graphify_cmd = app.add_subcommand("graphify", "Emit the graph interchange format");
  graphify_cmd->add_option("input", input, "File with one term per line, '-' for stdin");
  graphify_cmd->add_option("--expr", exprs, "Term given on the command line");
  rep.add_to(graphify_cmd);
  graphify_cmd->add_option("--seed", seed, "Random edge seed")->capture_default_str();
  graphify_cmd->add_option("--output,-o", output, "Output file (default stdout)");

  // stats
  std::size_t bin_width = 10;
  std::string csv, theorem_db, proof_log;
  auto* stats_cmd = app.add_subcommand("stats", "Node count and depth tables for each sharing mode");
  stats_cmd->add_option("input", input, "File with one term per line, '-' for stdin");
  stats_cmd->add_option("--expr", exprs, "Term given on the command line");
  stats_cmd->add_option("--theorem-db", theorem_db, "Use every statement of a theorem database");
  stats_cmd->add_flag("--blind-variables", rep.blind, "Rename every variable to x");
  stats_cmd->add_option("--bin-width", bin_width, "Histogram bin width")->capture_default_str();
  stats_cmd->add_option("--csv", csv, "Also write per-term rows as CSV");

  // gen-corpus
  ToyCorpusOptions toy;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a synthetic equational corpus");
  gen_cmd->add_option("--seed", toy.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--theorems", toy.theorems, "Number of theorems (definitions come on top)")
      ->capture_default_str();
  gen_cmd->add_option("--tactics", toy.tactic_count, "Tactic count")->capture_default_str();
  gen_cmd->add_option("--alphabet", toy.alphabet, "Unary function symbols")->capture_default_str();
  gen_cmd->add_option("--rule-density", toy.rule_density, "Fraction of symbol pairs that rewrite")
      ->capture_default_str();
  gen_cmd->add_option("--erase-probability", toy.erase_probability, "Rules that erase both symbols")
      ->capture_default_str();
  gen_cmd->add_option("--min-length", toy.min_length, "Shortest left-hand word")->capture_default_str();
  gen_cmd->add_option("--max-length", toy.max_length, "Longest left-hand word")->capture_default_str();
  gen_cmd->add_option("--conjunction-fraction", toy.conjunction_fraction, "Share of conjunctions")
      ->capture_default_str();
  gen_cmd->add_option("--reflexive-fraction", toy.reflexive_fraction, "Share of reflexive equations")
      ->capture_default_str();
  gen_cmd->add_option("--valid-fraction", toy.valid_fraction, "Share of theorems in the valid split")
      ->capture_default_str();
  gen_cmd->add_option("--test-fraction", toy.test_fraction, "Share of theorems in the test split")
      ->capture_default_str();
  gen_cmd->add_option("--theorem-db", theorem_db, "Output theorem database")->required();
  gen_cmd->add_option("--proof-log", proof_log, "Output proof log")->required();

  // train
  ModelFlags mf;
  AdamConfig adam;
  long steps = 3000, eval_every = 100;
  double holdout = 0.05;
  bool eval_on_train = false, float64 = false;
  std::string checkpoint, state, metrics_log, params = "averaged";
  std::optional<double> target;
  auto* train_cmd = app.add_subcommand("train", "Train the two-tower model");
  train_cmd->add_option("--theorem-db", theorem_db, "Theorem database")->required();
  train_cmd->add_option("--proof-log", proof_log, "Proof log")->required();
  train_cmd->add_option("--checkpoint", checkpoint, "Where to write the selected model")->required();
  train_cmd->add_option("--state", state, "Also write the final live parameters and optimizer state");
  train_cmd->add_option("--metrics-log", metrics_log, "Copy of the metric log");
  train_cmd->add_option("--seed", seed, "Seed for initialisation, batches and dropout")->capture_default_str();
  train_cmd->add_option("--steps", steps, "Optimizer steps")->capture_default_str();
  train_cmd->add_option("--eval-every", eval_every, "Steps between evaluations")->capture_default_str();
  train_cmd->add_option("--holdout-fraction", holdout, "Training theorems held out for checkpoint selection")
      ->capture_default_str();
  train_cmd->add_flag("--eval-on-train", eval_on_train, "Evaluate on the training examples instead");
  train_cmd->add_option("--params", params, "Parameters evaluated during training: averaged or live")
      ->check(CLI::IsMember({"averaged", "live"}))
      ->capture_default_str();
  train_cmd->add_option("--target-accuracy", target, "Stop when both proxy metrics reach this value");
  train_cmd->add_flag("--float64", float64, "Train in 64-bit arithmetic");
  train_cmd->add_option("--learning-rate", adam.learning_rate, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--decay-rate", adam.decay_rate, "Learning-rate decay factor")->capture_default_str();
  train_cmd->add_option("--decay-steps", adam.decay_steps, "Steps per decay factor")->capture_default_str();
  train_cmd->add_option("--polyak", adam.polyak_rate, "Parameter averaging rate")->capture_default_str();
  rep.add_to(train_cmd);
  mf.add_to(train_cmd);

  // eval
  std::string split = "valid";
  auto* eval_cmd = app.add_subcommand("eval", "Print tactic accuracy and relative premise accuracy");
  eval_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--theorem-db", theorem_db, "Theorem database")->required();
  eval_cmd->add_option("--proof-log", proof_log, "Proof log")->required();
  eval_cmd->add_option("--split", split, "Split to evaluate")
      ->check(CLI::IsMember({"train", "valid", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("--params", params, "averaged or live")
      ->check(CLI::IsMember({"averaged", "live"}))
      ->capture_default_str();
  eval_cmd->add_option("--seed", seed, "Seed for sampling random premises")->capture_default_str();

  // prove
  ProverConfig prover;
  std::string policy = "model", report_path, cache_path;
  std::size_t limit = 0;
  auto* prove_cmd = app.add_subcommand("prove", "Run guided proof search and write a report");
  prove_cmd->add_option("--policy", policy, "model, random or replay")
      ->check(CLI::IsMember({"model", "random", "replay"}))
      ->capture_default_str();
  prove_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint (policy model)");
  prove_cmd->add_option("--theorem-db", theorem_db, "Theorem database")->required();
  prove_cmd->add_option("--proof-log", proof_log, "Proof log (policy replay)");
  prove_cmd->add_option("--split", split, "Split to prove")
      ->check(CLI::IsMember({"train", "valid", "test"}))
      ->capture_default_str();
  prove_cmd->add_option("--params", params, "averaged or live")
      ->check(CLI::IsMember({"averaged", "live"}))
      ->capture_default_str();
  prove_cmd->add_option("--k1", prover.k1, "Tactics tried per goal")->capture_default_str();
  prove_cmd->add_option("--k2", prover.k2, "Premises passed to each tactic")->capture_default_str();
  prove_cmd->add_option("--max-expansions", prover.max_expansions, "Goal expansions per theorem")
      ->capture_default_str();
  prove_cmd->add_option("--time-limit", prover.time_limit_seconds, "Seconds per theorem")->capture_default_str();
  prove_cmd->add_option("--report", report_path, "Report file (default stdout)");
  prove_cmd->add_option("--premise-cache", cache_path, "Premise embedding cache to reuse or create");
  prove_cmd->add_option("--limit", limit, "Prove at most this many theorems");
  prove_cmd->add_option("--seed", seed, "Seed of the random policy")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  OutputGuard guard;
  try {
    if (parse_cmd->parsed()) {
      for (const auto& t : read_terms(input, exprs)) out << serialize(t) << '\n';
    } else if (graphify_cmd->parsed()) {
      const RepresentationConfig c = rep.config(seed);
      const auto terms = read_terms(input, exprs);
      emit(output, out, guard, [&](std::ostream& o) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
          if (i) o << '\n';
          write_graph(o, make_graph(terms[i], c));
        }
      });
    } else if (stats_cmd->parsed()) {
      std::vector<SExpr> terms;
      if (!theorem_db.empty()) terms = load_theorem_db(theorem_db).statements();
      if (!input.empty() || !exprs.empty() || terms.empty()) {
        auto more = read_terms(input, exprs);
        terms.insert(terms.end(), more.begin(), more.end());
      }
      cmd_stats(terms, rep.blind, bin_width, csv, out, guard);
    } else if (gen_cmd->parsed()) {
      const ToyCorpus corpus = generate_toy_corpus(toy);
      guard.add(theorem_db);
      guard.add(proof_log);
      save_theorem_db(theorem_db, corpus.db);
      save_proof_log(proof_log, corpus.log);
      out << "wrote " << corpus.db.size() << " records and " << corpus.log.size() << " proof steps\n";
    } else if (train_cmd->parsed()) {
      if (eval_every <= 0 || steps <= 0) throw std::invalid_argument("--steps and --eval-every must be positive");
      const TheoremDb db = load_theorem_db(theorem_db);
      const ProofLog log = load_proof_log(proof_log, mf.tactics);
      validate(log, db);
      const ProofLog train_split = select_split(log, db, Split::Train);
      if (train_split.empty()) throw std::invalid_argument("the proof log has no training steps");
      ProofLog train_steps, eval_steps;
      if (eval_on_train) {
        train_steps = eval_steps = train_split;
      } else {
        std::tie(train_steps, eval_steps) = holdout_split(train_split, holdout, seed);
      }
      TrainConfig config;
      config.model = mf.config(rep.config(seed));
      config.adam = adam;
      config.seed = seed;
      config.steps = steps;
      config.eval_every = eval_every;
      config.eval_params = parse_param_source(params);
      config.target_accuracy = target;
      config.metric_seed = seed + 1;
      guard.add(checkpoint);
      guard.add(state);
      std::ofstream metrics_file;
      if (!metrics_log.empty()) {
        guard.add(metrics_log);
        metrics_file.open(metrics_log, std::ios::trunc);
        if (!metrics_file) throw std::runtime_error("cannot write " + metrics_log);
      }
      std::ostream* mf_out = metrics_log.empty() ? nullptr : &metrics_file;
      if (float64) {
        run_train<double>(config, db, train_steps, eval_steps, checkpoint, state, out, mf_out);
      } else {
        run_train<float>(config, db, train_steps, eval_steps, checkpoint, state, out, mf_out);
      }
    } else if (eval_cmd->parsed()) {
      const TheoremDb db = load_theorem_db(theorem_db);
      const ProofLog log = load_proof_log(proof_log);
      validate(log, db);
      const ProofLog steps = select_split(log, db, parse_split(split));
      if (steps.empty()) throw std::invalid_argument("no proof steps in split " + split);
      const ParamSource source = parse_param_source(params);
      if (checkpoint_scalar_bytes(checkpoint) == 8) {
        run_eval<double>(checkpoint, source, db, steps, seed, out);
      } else {
        run_eval<float>(checkpoint, source, db, steps, seed, out);
      }
    } else if (prove_cmd->parsed()) {
      const TheoremDb db = load_theorem_db(theorem_db);
      std::vector<std::size_t> theorems = theorems_in_split(db, parse_split(split));
      if (limit > 0 && theorems.size() > limit) theorems.resize(limit);
      if (theorems.empty()) throw std::invalid_argument("no theorems in split " + split);
      EvaluationReport report;
      if (policy == "random") {
        RandomPolicy p(seed);
        report = evaluate_prover(db, theorems, p, prover);
      } else if (policy == "replay") {
        if (proof_log.empty()) throw CLI::RequiredError("--proof-log");
        const ProofLog log = load_proof_log(proof_log);
        validate(log, db);
        ReplayPolicy p(log);
        report = evaluate_prover(db, theorems, p, prover);
      } else {
        if (checkpoint.empty()) throw CLI::RequiredError("--checkpoint");
        const ParamSource source = parse_param_source(params);
        if (checkpoint_scalar_bytes(checkpoint) == 8) {
          report = run_model_prover<double>(checkpoint, source, db, theorems, prover, cache_path, guard, err);
        } else {
          report = run_model_prover<float>(checkpoint, source, db, theorems, prover, cache_path, guard, err);
        }
      }
      emit(report_path, out, guard, [&](std::ostream& o) { write_report(o, report); });
      if (!report_path.empty() && report_path != "-") {
        out << std::setprecision(6) << "closed " << report.closed() << " of " << report.theorems.size()
            << " fraction " << report.closed_fraction() << " mean_length " << report.mean_proof_length()
            << " success_rate " << report.success_rate() << '\n';
      }
    }
    guard.commit();
    return 0;
  } catch (const CLI::RequiredError& e) {
    err << "usage error: " << e.what() << " is required\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace holgraph
