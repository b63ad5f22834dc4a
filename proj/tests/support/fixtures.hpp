#pragma once

// Shared test fixtures: the five reference models, random tree generators,
// and a leaf-probability evaluator that walks tree paths directly instead of
// going through the design matrix.

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "floret/io.hpp"
#include "floret/model.hpp"

#ifndef FLORET_DATA_DIR
#error "FLORET_DATA_DIR must point at the repository data/ directory"
#endif

namespace floret::testing {

inline std::filesystem::path data_dir() { return FLORET_DATA_DIR; }

inline Model fixture(const std::string& name) {
  return load_model(data_dir() / "models" / (name + ".json"));
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"hwe", "calves", "vaccine", "regimen", "severity"};
  return names;
}

inline ParameterVector params(std::initializer_list<std::initializer_list<double>> blocks) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : blocks) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
    Eigen::Index i = 0;
    for (double x : b) v(i++) = x;
    out.push_back(v);
  }
  return ParameterVector(std::move(out));
}

// p_i as the product of edge probabilities along leaf i's path.
inline Eigen::VectorXd path_probabilities(const SequentialTree& tree, const ParameterVector& theta) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(tree.leaf_count()));
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    double prob = 1.0;
    for (const auto& step : tree.leaves()[i].path) {
      prob *= theta(tree.nodes()[step.node].floret, step.outcome);
    }
    p(static_cast<Eigen::Index>(i)) = prob;
  }
  return p;
}

// Edge counts per leaf obtained by re-walking every path; independent of
// build_design_matrix.
inline Eigen::MatrixXi rewalk_matrix(const SequentialTree& tree) {
  std::vector<std::size_t> offset;
  std::size_t rows = 0;
  for (const auto& f : tree.florets()) {
    offset.push_back(rows);
    rows += f.arity();
  }
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(tree.leaf_count()));
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    std::size_t node = 0;
    for (const auto& step : tree.leaves()[i].path) {
      if (step.node != node) throw std::logic_error("leaf path is not a root-to-leaf walk");
      const auto& spec = tree.nodes()[node];
      ++m(static_cast<Eigen::Index>(offset[spec.floret] + step.outcome), static_cast<Eigen::Index>(i));
      if (spec.children[step.outcome]) node = *spec.children[step.outcome];
    }
  }
  return m;
}

struct RandomTreeOptions {
  int max_depth = 3;
  std::size_t max_florets = 3;
  std::size_t max_arity = 3;
  double leaf_probability = 0.35;
};

// Random tree of depth <= max_depth. Florets are drawn per node; unused
// florets are dropped so every floret appears at least once.
inline SequentialTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> nflorets(1, opt.max_florets);
  std::uniform_int_distribution<std::size_t> arity(2, opt.max_arity);
  std::bernoulli_distribution leaf(opt.leaf_probability);

  const std::size_t F = nflorets(rng);
  std::vector<Floret> florets;
  for (std::size_t f = 0; f < F; ++f) {
    Floret fl;
    fl.id = "f" + std::to_string(f);
    const std::size_t a = arity(rng);
    for (std::size_t j = 0; j < a; ++j) fl.outcomes.push_back("o" + std::to_string(j));
    florets.push_back(std::move(fl));
  }
  std::uniform_int_distribution<std::size_t> pick(0, F - 1);

  std::vector<NodeSpec> nodes;
  auto grow = [&](auto&& self, int depth) -> std::size_t {
    const std::size_t index = nodes.size();
    nodes.push_back({pick(rng), {}});
    const std::size_t a = florets[nodes[index].floret].arity();
    std::vector<std::optional<std::size_t>> kids;
    for (std::size_t j = 0; j < a; ++j) {
      if (depth + 1 < opt.max_depth && !leaf(rng)) {
        kids.emplace_back(self(self, depth + 1));
      } else {
        kids.emplace_back(std::nullopt);
      }
    }
    nodes[index].children = std::move(kids);
    return index;
  };
  grow(grow, 0);

  std::vector<std::size_t> remap(F, F);
  std::vector<Floret> used;
  for (auto& n : nodes) {
    if (remap[n.floret] == F) {
      remap[n.floret] = used.size();
      used.push_back(florets[n.floret]);
      used.back().id = "f" + std::to_string(remap[n.floret]);
    }
    n.floret = remap[n.floret];
  }
  return SequentialTree(std::move(used), std::move(nodes));
}

// Single-floret tree where every root-to-leaf path has length `depth`.
inline SequentialTree complete_tree(std::size_t arity, int depth) {
  Floret fl{"theta", {}};
  for (std::size_t j = 0; j < arity; ++j) fl.outcomes.push_back("o" + std::to_string(j));
  std::vector<NodeSpec> nodes;
  auto grow = [&](auto&& self, int level) -> std::size_t {
    const std::size_t index = nodes.size();
    nodes.push_back({0, {}});
    std::vector<std::optional<std::size_t>> kids;
    for (std::size_t j = 0; j < arity; ++j) {
      kids.emplace_back(level + 1 < depth ? std::optional<std::size_t>(self(self, level + 1))
                                          : std::nullopt);
    }
    nodes[index].children = std::move(kids);
    return index;
  };
  grow(grow, 0);
  return SequentialTree({fl}, std::move(nodes));
}

// Interior parameters with every component at least ~min_component.
inline ParameterVector random_theta(const DesignMatrix& m, std::mt19937_64& rng,
                                    double min_component = 0.02) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> blocks;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const auto k = static_cast<Eigen::Index>(m.block(f).size);
    Eigen::VectorXd b(k);
    for (Eigen::Index j = 0; j < k; ++j) b(j) = min_component + u(rng);
    b /= b.sum();
    blocks.push_back(b);
  }
  return ParameterVector(std::move(blocks));
}

inline std::vector<std::int64_t> random_counts(std::size_t size, std::mt19937_64& rng,
                                               std::int64_t lo = 1, std::int64_t hi = 200) {
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  std::vector<std::int64_t> y(size);
  for (auto& v : y) v = d(rng);
  return y;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace floret::testing
