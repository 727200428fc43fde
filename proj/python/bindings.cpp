#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <variant>

#include "holgraph/calculus.hpp"
#include "holgraph/checkpoint.hpp"
#include "holgraph/cli.hpp"
#include "holgraph/corpus.hpp"
#include "holgraph/graph.hpp"
#include "holgraph/model.hpp"
#include "holgraph/sexpr.hpp"
#include "holgraph/training.hpp"

namespace py = pybind11;
using namespace holgraph;

namespace {

RepresentationConfig representation(const std::string& sharing, bool blind, bool random_edges,
                                    const std::string& direction, std::uint64_t seed) {
  RepresentationConfig c;
  c.sharing = parse_sharing(sharing);
  c.variable_blinding = blind;
  c.random_edges = random_edges;
  c.direction = parse_direction(direction);
  c.random_seed = seed;
  validate(c);
  return c;
}

py::dict graph_dict(const TermGraph& g) {
  std::vector<std::string> tokens;
  for (const auto& n : g.nodes) tokens.push_back(n.token);
  std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
  for (const auto& e : g.edges) edges.emplace_back(e.src, e.dst, e.label);
  py::dict d;
  d["tokens"] = tokens;
  d["edges"] = edges;
  d["root"] = g.root;
  d["kind"] = to_string(g.kind);
  d["direction"] = to_string(g.direction);
  return d;
}

// Precision follows the checkpoint; Python always sees doubles.
class PyModel {
 public:
  PyModel(const std::filesystem::path& path, const std::string& params) {
    const ParamSource source = parse_param_source(params);
    if (checkpoint_scalar_bytes(path) == 8) {
      model_ = load_model<double>(path, source);
    } else {
      model_ = load_model<float>(path, source);
    }
  }

  std::vector<double> embed_goal(const std::string& text) const {
    return std::visit(
        [&](const auto& m) { return flat(holgraph::embed_goal(m, graph_of(m, text))); }, model_);
  }

  std::vector<double> embed_premise(const std::string& text) const {
    return std::visit(
        [&](const auto& m) { return flat(holgraph::embed_premise(m, graph_of(m, text))); }, model_);
  }

  std::vector<double> tactic_logits(const std::string& goal) const {
    return std::visit(
        [&](const auto& m) { return flat(predict_tactic(m, holgraph::embed_goal(m, graph_of(m, goal)))); }, model_);
  }

  std::vector<double> score_premises(const std::string& goal, const std::vector<std::string>& premises) const {
    return std::visit(
        [&](const auto& m) {
          using T = typename std::decay_t<decltype(m.params.goal_gnn.node_mlp.layers[0].weight)>::Scalar;
          const Matrix<T> g = holgraph::embed_goal(m, graph_of(m, goal));
          Matrix<T> p(static_cast<Eigen::Index>(premises.size()), g.cols());
          for (std::size_t i = 0; i < premises.size(); ++i) {
            p.row(static_cast<Eigen::Index>(i)) = holgraph::embed_premise(m, graph_of(m, premises[i]));
          }
          const auto s = holgraph::score_premises(m, g, p);
          return std::vector<double>(s.begin(), s.end());
        },
        model_);
  }

  int hops() const {
    return std::visit([](const auto& m) { return m.config.gnn.hops; }, model_);
  }

 private:
  template <typename M>
  static TermGraph graph_of(const M& m, const std::string& text) {
    return term_graph(parse(text), m.config.representation);
  }

  template <typename T>
  static std::vector<double> flat(const Matrix<T>& x) {
    return std::vector<double>(x.data(), x.data() + x.size());
  }

  std::variant<Model<float>, Model<double>> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph representations of higher-order logic terms, a two-tower GNN scorer and a toy prover.";

  m.def(
      "canonical", [](const std::string& text) { return serialize(parse(text)); }, py::arg("text"),
      "Parse an S-expression and print it back in canonical form.");

  m.def(
      "graph",
      [](const std::string& text, const std::string& sharing, bool blind, bool random_edges,
         const std::string& direction, std::uint64_t seed) {
        return graph_dict(make_graph(parse(text), representation(sharing, blind, random_edges, direction, seed)));
      },
      py::arg("text"), py::arg("sharing") = "subexpr", py::arg("blind_variables") = false,
      py::arg("random_edges") = false, py::arg("direction") = "both", py::arg("seed") = 0,
      "Graph of a term as a dict with tokens, (src, dst, label) edges, root, kind and direction.");

  m.def(
      "stats",
      [](const std::string& text, const std::string& sharing, bool blind) {
        const GraphStats s = stats(make_graph(parse(text), representation(sharing, blind, false, "both", 0)));
        py::dict d;
        d["nodes"] = s.node_count;
        d["edges"] = s.edge_count;
        d["depth"] = s.depth;
        return d;
      },
      py::arg("text"), py::arg("sharing") = "subexpr", py::arg("blind_variables") = false);

  m.def(
      "apply_tactic",
      [](const std::string& goal, int tactic, const std::vector<std::string>& premises) -> py::object {
        std::vector<SExpr> parsed;
        for (const auto& p : premises) parsed.push_back(parse(p));
        const TacticOutcome out = apply_tactic(parse(goal), tactic, parsed);
        if (std::holds_alternative<Failed>(out)) return py::none();
        std::vector<std::string> goals;
        if (const auto* s = std::get_if<Subgoals>(&out)) {
          for (const auto& g : s->goals) goals.push_back(serialize(g));
        }
        return py::cast(goals);
      },
      py::arg("goal"), py::arg("tactic"), py::arg("premises") = std::vector<std::string>{},
      "None when the tactic fails, otherwise the list of subgoals (empty when the goal closed).");

  m.def(
      "generate_corpus",
      [](std::uint64_t seed, std::size_t theorems, const std::filesystem::path& db, const std::filesystem::path& log) {
        ToyCorpusOptions o;
        o.seed = seed;
        o.theorems = theorems;
        const ToyCorpus c = generate_toy_corpus(o);
        save_theorem_db(db, c.db);
        save_proof_log(log, c.log);
        return py::make_tuple(c.db.size(), c.log.size());
      },
      py::arg("seed"), py::arg("theorems"), py::arg("theorem_db"), py::arg("proof_log"),
      "Write a toy corpus; returns (records, proof steps).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation in process; returns (exit code, stdout, stderr).");

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::filesystem::path&, const std::string&>(), py::arg("checkpoint"),
           py::arg("params") = "averaged")
      .def_property_readonly("hops", &PyModel::hops)
      .def("embed_goal", &PyModel::embed_goal, py::arg("goal"))
      .def("embed_premise", &PyModel::embed_premise, py::arg("premise"))
      .def("tactic_logits", &PyModel::tactic_logits, py::arg("goal"))
      .def("score_premises", &PyModel::score_premises, py::arg("goal"), py::arg("premises"));

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TacticError>(m, "TacticError", PyExc_ValueError);
  py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);
}
