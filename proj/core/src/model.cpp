#include "floret/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "floret/error.hpp"
#include "floret/rational.hpp"

namespace floret {

// ---------------------------------------------------------------------------
// Rational helpers

RationalMatrix to_rational(const Eigen::MatrixXi& m) {
  RationalMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out[r].reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r].emplace_back(m(r, c));
  }
  return out;
}

std::size_t rational_rank(RationalMatrix rows) {
  if (rows.empty()) return 0;
  const std::size_t ncols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < ncols && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    const Rational lead = rows[rank][col];
    for (std::size_t c = col; c < ncols; ++c) rows[rank][c] /= lead;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      const Rational factor = rows[r][col];
      for (std::size_t c = col; c < ncols; ++c) rows[r][c] -= factor * rows[rank][c];
    }
    ++rank;
  }
  return rank;
}

bool in_row_space(const RationalMatrix& rows, const std::vector<Rational>& target) {
  for (const auto& row : rows) {
    if (row.size() != target.size()) throw std::invalid_argument("in_row_space: width mismatch");
  }
  RationalMatrix augmented = rows;
  augmented.push_back(target);
  return rational_rank(rows) == rational_rank(std::move(augmented));
}

double to_double(const Rational& r) { return static_cast<double>(r); }

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
}

// ---------------------------------------------------------------------------
// SequentialTree

void SequentialTree::validate_florets(const std::vector<Floret>& florets) {
  if (florets.empty()) throw ModelError("model declares no florets", "/florets");
  std::set<std::string> ids;
  for (std::size_t f = 0; f < florets.size(); ++f) {
    const auto where = "/florets/" + std::to_string(f);
    const Floret& fl = florets[f];
    if (fl.id.empty()) throw ModelError("floret id must be non-empty", where);
    if (!ids.insert(fl.id).second) throw ModelError("duplicate floret id '" + fl.id + "'", where);
    if (fl.arity() < 2) {
      throw ModelError("floret '" + fl.id + "' needs at least 2 outcomes", where);
    }
    std::set<std::string> labels;
    for (const auto& label : fl.outcomes) {
      if (label.empty()) throw ModelError("empty outcome label", where);
      if (label.find('/') != std::string::npos) {
        throw ModelError("outcome label '" + label + "' must not contain '/'", where);
      }
      if (!labels.insert(label).second) {
        throw ModelError("duplicate outcome label '" + label + "' in floret '" + fl.id + "'",
                         where);
      }
    }
  }
}

SequentialTree::SequentialTree(std::vector<Floret> florets, std::vector<NodeSpec> nodes)
    : florets_(std::move(florets)), nodes_(std::move(nodes)) {
  validate_florets(florets_);
  if (nodes_.empty()) throw ModelError("tree has no nodes", "/tree");

  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const NodeSpec& node = nodes_[k];
    const auto where = "node " + std::to_string(k);
    if (node.floret >= florets_.size()) throw ModelError("unknown floret reference", where);
    const Floret& fl = florets_[node.floret];
    if (node.children.size() != fl.arity()) {
      throw ModelError("node has " + std::to_string(node.children.size()) +
                           " outgoing edges but floret '" + fl.id + "' has " +
                           std::to_string(fl.arity()) + " outcomes",
                       where);
    }
    for (const auto& child : node.children) {
      if (child && *child >= nodes_.size()) throw ModelError("child index out of range", where);
    }
  }

  // Depth-first walk from the root. Each node may be entered once; a second
  // visit is either a cycle (node on the current stack) or a shared child.
  enum class Mark { unseen, active, done };
  std::vector<Mark> mark(nodes_.size(), Mark::unseen);
  std::vector<PathStep> path;

  auto visit = [&](auto&& self, std::size_t k) -> void {
    if (mark[k] == Mark::active) throw ModelError("cycle detected", "node " + std::to_string(k));
    if (mark[k] == Mark::done) {
      throw ModelError("node reachable along more than one path", "node " + std::to_string(k));
    }
    mark[k] = Mark::active;
    const NodeSpec& node = nodes_[k];
    for (std::size_t j = 0; j < node.children.size(); ++j) {
      path.push_back({k, j});
      if (const auto& child = node.children[j]) {
        self(self, *child);
      } else {
        Leaf leaf;
        leaf.path = path;
        for (const auto& step : path) {
          if (!leaf.label.empty()) leaf.label += '/';
          leaf.label += florets_[nodes_[step.node].floret].outcomes[step.outcome];
        }
        leaves_.push_back(std::move(leaf));
      }
      path.pop_back();
    }
    mark[k] = Mark::done;
  };
  visit(visit, 0);

  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (mark[k] == Mark::unseen) {
      throw ModelError("node not reachable from the root", "node " + std::to_string(k));
    }
  }
  if (leaves_.size() < 2) throw ModelError("tree must have at least 2 leaves", "/tree");

  for (std::size_t f = 0; f < florets_.size(); ++f) {
    const bool used = std::any_of(nodes_.begin(), nodes_.end(),
                                  [f](const NodeSpec& n) { return n.floret == f; });
    if (!used) {
      throw ModelError("floret '" + florets_[f].id + "' is not used by any node",
                       "/florets/" + std::to_string(f));
    }
  }
}

std::size_t SequentialTree::parameter_count() const {
  std::size_t j = 0;
  for (const auto& f : florets_) j += f.arity();
  return j;
}

std::optional<std::size_t> SequentialTree::floret_index(std::string_view id) const {
  for (std::size_t f = 0; f < florets_.size(); ++f) {
    if (florets_[f].id == id) return f;
  }
  return std::nullopt;
}

std::optional<std::size_t> SequentialTree::leaf_index(std::string_view label) const {
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    if (leaves_[i].label == label) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> SequentialTree::floret_nodes(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].floret == f) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// DesignMatrix

DesignMatrix::DesignMatrix(Eigen::MatrixXi entries, std::vector<RowBlock> blocks)
    : entries_(std::move(entries)), blocks_(std::move(blocks)) {
  std::size_t expected = 0;
  for (const auto& b : blocks_) {
    if (b.offset != expected || b.size < 2) {
      throw DomainError("row blocks must be contiguous and hold at least 2 rows");
    }
    expected += b.size;
  }
  if (expected != rows()) throw DomainError("row blocks do not cover the matrix");
  if ((entries_.array() < 0).any()) throw DomainError("design matrix entries must be >= 0");
  for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
    if (entries_.col(c).sum() == 0) throw DomainError("design matrix has an all-zero column");
  }
}

Eigen::MatrixXi DesignMatrix::block_matrix(std::size_t f) const {
  const RowBlock& b = block(f);
  return entries_.middleRows(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
}

Eigen::VectorXi DesignMatrix::block_column_sums(std::size_t f) const {
  return block_matrix(f).colwise().sum().transpose();
}

DesignMatrix build_design_matrix(const SequentialTree& tree) {
  std::vector<RowBlock> blocks;
  std::size_t offset = 0;
  for (const auto& fl : tree.florets()) {
    blocks.push_back({offset, fl.arity()});
    offset += fl.arity();
  }
  Eigen::MatrixXi entries = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(offset),
                                                  static_cast<Eigen::Index>(tree.leaf_count()));
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    for (const auto& step : tree.leaves()[i].path) {
      const std::size_t row = blocks[tree.nodes()[step.node].floret].offset + step.outcome;
      entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) += 1;
    }
  }
  return DesignMatrix(std::move(entries), std::move(blocks));
}

bool floret_has_overall_effect(const DesignMatrix& m, std::size_t f) {
  const RationalMatrix rows = to_rational(m.block_matrix(f));
  const std::vector<Rational> ones(m.cols(), Rational(1));
  return in_row_space(rows, ones);
}

int degrees_of_freedom(const DesignMatrix& m) {
  const int df = static_cast<int>(m.cols()) - 1 -
                 (static_cast<int>(m.rows()) - static_cast<int>(m.floret_count()));
  if (df < 0) throw DomainError("model is over-parameterized (negative degrees of freedom)");
  return df;
}

// ---------------------------------------------------------------------------
// ParameterVector

ParameterVector::ParameterVector(std::vector<Eigen::VectorXd> blocks) : blocks_(std::move(blocks)) {
  for (std::size_t f = 0; f < blocks_.size(); ++f) {
    const auto& b = blocks_[f];
    const auto where = "floret " + std::to_string(f);
    if (b.size() == 0) throw DomainError("empty parameter block", where);
    if (!b.allFinite() || (b.array() < 0.0).any()) {
      throw DomainError("edge probabilities must be finite and non-negative", where);
    }
    if (std::abs(b.sum() - 1.0) > kSimplexTolerance) {
      throw DomainError("edge probabilities must sum to 1", where);
    }
  }
}

ParameterVector ParameterVector::from_reduced(const DesignMatrix& m, const Eigen::VectorXd& reduced) {
  if (static_cast<std::size_t>(reduced.size()) != m.reduced_size()) {
    throw DomainError("reduced parameter vector has wrong length");
  }
  std::vector<Eigen::VectorXd> blocks;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const auto size = static_cast<Eigen::Index>(m.block(f).size);
    Eigen::VectorXd b(size);
    b.head(size - 1) = reduced.segment(static_cast<Eigen::Index>(m.reduced_offset(f)), size - 1);
    b(size - 1) = 1.0 - b.head(size - 1).sum();
    blocks.push_back(std::move(b));
  }
  return ParameterVector(std::move(blocks));
}

bool ParameterVector::interior() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const Eigen::VectorXd& b) { return (b.array() > 0.0).all(); });
}

Eigen::VectorXd ParameterVector::flat() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks_) total += b.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks_) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

Eigen::VectorXd ParameterVector::reduced() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks_) total += b.size() - 1;
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks_) {
    out.segment(at, b.size() - 1) = b.head(b.size() - 1);
    at += b.size() - 1;
  }
  return out;
}

void check_dimensions(const DesignMatrix& m, const ParameterVector& theta) {
  if (theta.floret_count() != m.floret_count()) {
    throw DomainError("parameter vector has " + std::to_string(theta.floret_count()) +
                      " florets, model has " + std::to_string(m.floret_count()));
  }
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    if (static_cast<std::size_t>(theta.block(f).size()) != m.block(f).size) {
      throw DomainError("parameter block size does not match floret arity",
                        "floret " + std::to_string(f));
    }
  }
}

Eigen::VectorXd leaf_probabilities(const DesignMatrix& m, const ParameterVector& theta) {
  check_dimensions(m, theta);
  const Eigen::VectorXd flat = theta.flat();
  Eigen::VectorXd p = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m.cols()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index r = 0; r < flat.size(); ++r) {
      const int power = m.entries()(r, i);
      for (int e = 0; e < power; ++e) p(i) *= flat(r);
    }
  }
  // The tree structure guarantees normalization; a failure here means the
  // matrix was not produced from a tree.
  if (std::abs(p.sum() - 1.0) > 1e-10) {
    throw DomainError("leaf probabilities do not sum to 1; matrix is not a tree design");
  }
  return p;
}

// ---------------------------------------------------------------------------

StructureSummary summarize(const Model& model) {
  StructureSummary s;
  s.leaves = model.tree.leaf_count();
  s.nodes = model.tree.node_count();
  s.parameters = model.tree.parameter_count();
  for (std::size_t f = 0; f < model.tree.floret_count(); ++f) {
    FloretSummary fs;
    fs.id = model.tree.florets()[f].id;
    fs.outcomes = model.tree.florets()[f].arity();
    fs.nodes = model.tree.floret_nodes(f);
    fs.overall_effect = floret_has_overall_effect(model.matrix, f);
    s.florets.push_back(std::move(fs));
  }
  try {
    s.df = degrees_of_freedom(model.matrix);
  } catch (const DomainError&) {
    s.df.reset();
  }
  return s;
}

}  // namespace floret
