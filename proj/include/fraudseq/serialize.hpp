#pragma once

#include <fstream>
#include <string>

#include "fraudseq/adaboost.hpp"
#include "fraudseq/forest.hpp"
#include "fraudseq/logreg.hpp"

namespace fraudseq {

// Structured-text model files, exact round trip via shortest-decimal floats.

namespace detail {

inline void write_tree(std::ostream& out, const DecisionTree& tree) {
  out << "tree " << tree.nodes().size() << '\n';
  for (const auto& n : tree.nodes())
    out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' '
        << n.right << ' ' << format_double(n.value) << '\n';
}

inline DecisionTree read_tree(std::istream& in, const std::string& path) {
  std::string tag;
  std::size_t n_nodes = 0;
  if (!(in >> tag >> n_nodes) || tag != "tree")
    throw std::runtime_error(path + ": expected tree record");
  std::vector<DecisionTree::Node> nodes(n_nodes);
  std::string thr, val;
  for (auto& n : nodes) {
    if (!(in >> n.feature >> thr >> n.left >> n.right >> val))
      throw std::runtime_error(path + ": truncated tree record");
    n.threshold = parse_double(thr);
    n.value = parse_double(val);
  }
  DecisionTree tree;
  tree.set_nodes(std::move(nodes));
  return tree;
}

}  // namespace detail

inline void save_forest(const std::string& path, const RandomForest& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  const RfParams& p = model.params();
  out << "fraudseq-rf 1\n";
  out << "params " << p.n_trees << ' ' << p.n_features_per_split << ' '
      << p.min_samples_leaf << ' ' << p.max_depth << ' ' << p.seed << '\n';
  for (const auto& t : model.trees()) detail::write_tree(out, t);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline RandomForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic, tag;
  int version = 0;
  in >> magic >> version >> tag;
  if (magic != "fraudseq-rf" || version != 1 || tag != "params")
    throw std::runtime_error(path + ": not a fraudseq random-forest file");
  RfParams p;
  in >> p.n_trees >> p.n_features_per_split >> p.min_samples_leaf >> p.max_depth >> p.seed;
  std::vector<DecisionTree> trees;
  trees.reserve(p.n_trees);
  for (std::size_t i = 0; i < p.n_trees; ++i) trees.push_back(detail::read_tree(in, path));
  RandomForest model;
  model.restore(std::move(trees), p);
  return model;
}

inline void save_adaboost(const std::string& path, const AdaBoost& model,
                          const AdaParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << "fraudseq-ada 1\n";
  out << "params " << params.n_trees << ' ' << format_double(params.learning_rate)
      << ' ' << format_double(params.stop_tolerance) << ' ' << params.max_tree_depth
      << ' ' << params.seed << '\n';
  out << "rounds " << model.rounds().size() << '\n';
  for (const auto& r : model.rounds()) {
    out << "alpha " << format_double(r.alpha) << ' '
        << format_double(r.weighted_error) << '\n';
    detail::write_tree(out, r.tree);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline AdaBoost load_adaboost(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic, tag, lr, tol;
  int version = 0;
  in >> magic >> version >> tag;
  if (magic != "fraudseq-ada" || version != 1 || tag != "params")
    throw std::runtime_error(path + ": not a fraudseq adaboost file");
  AdaParams p;
  in >> p.n_trees >> lr >> tol >> p.max_tree_depth >> p.seed;
  p.learning_rate = parse_double(lr);
  p.stop_tolerance = parse_double(tol);
  std::size_t n_rounds = 0;
  in >> tag >> n_rounds;
  if (tag != "rounds") throw std::runtime_error(path + ": expected rounds record");
  std::vector<AdaBoost::Round> rounds;
  rounds.reserve(n_rounds);
  for (std::size_t i = 0; i < n_rounds; ++i) {
    std::string a, e;
    in >> tag >> a >> e;
    if (tag != "alpha") throw std::runtime_error(path + ": expected alpha record");
    AdaBoost::Round r;
    r.alpha = parse_double(a);
    r.weighted_error = parse_double(e);
    r.tree = detail::read_tree(in, path);
    rounds.push_back(std::move(r));
  }
  AdaBoost model;
  model.restore(std::move(rounds), p);
  return model;
}

inline void save_logreg(const std::string& path, const LogisticRegression& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << "fraudseq-logreg 1\n";
  auto write_vec = [&](const char* name, const std::vector<double>& v) {
    out << name << ' ' << v.size();
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
  };
  write_vec("mean", model.feature_means());
  write_vec("scale", model.feature_scales());
  write_vec("weights", model.weights());
  out << "intercept " << format_double(model.intercept()) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline LogisticRegression load_logreg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "fraudseq-logreg" || version != 1)
    throw std::runtime_error(path + ": not a fraudseq logreg file");
  auto read_vec = [&](const char* name) {
    std::string tag;
    std::size_t n = 0;
    in >> tag >> n;
    if (tag != name) throw std::runtime_error(path + ": expected " + name + " record");
    std::vector<double> v(n);
    std::string tok;
    for (auto& x : v) {
      in >> tok;
      x = parse_double(tok);
    }
    return v;
  };
  auto mean = read_vec("mean");
  auto scale = read_vec("scale");
  auto weights = read_vec("weights");
  std::string tag, val;
  in >> tag >> val;
  if (tag != "intercept") throw std::runtime_error(path + ": expected intercept record");
  LogisticRegression model;
  model.restore(std::move(mean), std::move(scale), std::move(weights), parse_double(val));
  return model;
}

}  // namespace fraudseq
