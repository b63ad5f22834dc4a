#pragma once

// Sequential-design trees whose nodes are partitioned into florets, and the
// design matrices they induce. A floret is a set of nodes that share one
// outcome set and one outcome distribution; leaf probabilities are monomials
// in the floret edge probabilities,
//
//   p_i = prod_f prod_j theta_{fj}^{mu_{fji}},
//
// where mu_{fji} counts how often edge (f, j) lies on the root-to-leaf path
// of leaf i.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace floret {

struct Floret {
  std::string id;
  std::vector<std::string> outcomes;

  std::size_t arity() const { return outcomes.size(); }
};

// Construction input for SequentialTree: one entry per non-terminal node.
// children[j] is the child reached by the floret's j-th outcome, or nullopt
// for a leaf. Node 0 is the root.
struct NodeSpec {
  std::size_t floret = 0;
  std::vector<std::optional<std::size_t>> children;
};

struct PathStep {
  std::size_t node = 0;
  std::size_t outcome = 0;
};

struct Leaf {
  std::vector<PathStep> path;
  // Outcome labels along the path joined with '/', e.g. "Yes/No".
  std::string label;
};

// A validated experiment tree. Immutable after construction.
class SequentialTree {
 public:
  // Throws ModelError on: unknown floret reference, arity mismatch, empty or
  // duplicate outcome labels, duplicate floret ids, floret with fewer than two
  // outcomes, cycles, nodes reachable twice or not at all, fewer than 2 leaves.
  SequentialTree(std::vector<Floret> florets, std::vector<NodeSpec> nodes);

  // The floret-level subset of the checks above.
  static void validate_florets(const std::vector<Floret>& florets);

  const std::vector<Floret>& florets() const { return florets_; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  // Leaves in depth-first order, children visited in declared outcome order.
  const std::vector<Leaf>& leaves() const { return leaves_; }

  std::size_t leaf_count() const { return leaves_.size(); }       // I
  std::size_t node_count() const { return nodes_.size(); }        // K
  std::size_t floret_count() const { return florets_.size(); }    // F
  std::size_t parameter_count() const;                            // J

  std::optional<std::size_t> floret_index(std::string_view id) const;
  std::optional<std::size_t> leaf_index(std::string_view label) const;
  // Node indices belonging to floret f, ascending.
  std::vector<std::size_t> floret_nodes(std::size_t f) const;

 private:
  std::vector<Floret> florets_;
  std::vector<NodeSpec> nodes_;
  std::vector<Leaf> leaves_;
};

struct RowBlock {
  std::size_t offset = 0;
  std::size_t size = 0;
};

// J x I integer matrix with one contiguous row block per floret, in floret
// declaration order. Columns follow the tree's leaf order.
class DesignMatrix {
 public:
  DesignMatrix(Eigen::MatrixXi entries, std::vector<RowBlock> blocks);

  const Eigen::MatrixXi& entries() const { return entries_; }
  int operator()(std::size_t row, std::size_t col) const {
    return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  std::size_t floret_count() const { return blocks_.size(); }
  const std::vector<RowBlock>& blocks() const { return blocks_; }
  const RowBlock& block(std::size_t f) const { return blocks_.at(f); }
  // Rows of M_f.
  Eigen::MatrixXi block_matrix(std::size_t f) const;
  // Column sums of M_f: number of floret-f nodes on each leaf path.
  Eigen::VectorXi block_column_sums(std::size_t f) const;

  // Position of theta_{f,1} inside the non-redundant vector theta~ that drops
  // the last component of every floret; its length is J - F.
  std::size_t reduced_offset(std::size_t f) const { return blocks_.at(f).offset - f; }
  std::size_t reduced_size() const { return rows() - floret_count(); }

 private:
  Eigen::MatrixXi entries_;
  std::vector<RowBlock> blocks_;
};

// Edge probabilities grouped by floret. Every block lies on the closed
// simplex (non-negative, sums to 1 within 1e-12); interior() tells whether
// all components are strictly positive. Boundary points are representable
// because closed-form MLEs and degenerate simulation settings produce them.
class ParameterVector {
 public:
  static constexpr double kSimplexTolerance = 1e-12;

  ParameterVector() = default;
  // Throws DomainError if a block is empty, has a negative or non-finite
  // entry, or does not sum to one.
  explicit ParameterVector(std::vector<Eigen::VectorXd> blocks);

  // Builds from theta~ (J_f - 1 leading components per floret).
  static ParameterVector from_reduced(const DesignMatrix& m, const Eigen::VectorXd& reduced);

  std::size_t floret_count() const { return blocks_.size(); }
  const Eigen::VectorXd& block(std::size_t f) const { return blocks_.at(f); }
  const std::vector<Eigen::VectorXd>& blocks() const { return blocks_; }
  double operator()(std::size_t f, std::size_t j) const {
    return blocks_.at(f)(static_cast<Eigen::Index>(j));
  }

  bool interior() const;
  Eigen::VectorXd flat() const;
  Eigen::VectorXd reduced() const;

 private:
  std::vector<Eigen::VectorXd> blocks_;
};

DesignMatrix build_design_matrix(const SequentialTree& tree);

// True iff the all-ones row lies in the rational row space of M_f. Decided by
// exact rational elimination.
bool floret_has_overall_effect(const DesignMatrix& m, std::size_t f);

// (I - 1) - sum_f (J_f - 1). Throws DomainError if negative.
int degrees_of_freedom(const DesignMatrix& m);

// Throws DomainError if theta does not match the block structure of m, or is
// not on the simplex.
void check_dimensions(const DesignMatrix& m, const ParameterVector& theta);

// p = prod_f theta_f^{M_f'}. Requires theta on the simplex with matching
// dimensions; zero components are allowed (0^0 = 1).
Eigen::VectorXd leaf_probabilities(const DesignMatrix& m, const ParameterVector& theta);

// Tree and design matrix together, as loaded from a model file.
struct Model {
  SequentialTree tree;
  DesignMatrix matrix;

  explicit Model(SequentialTree t) : tree(std::move(t)), matrix(build_design_matrix(tree)) {}
};

struct FloretSummary {
  std::string id;
  std::size_t outcomes = 0;
  std::vector<std::size_t> nodes;
  bool overall_effect = false;
};

struct StructureSummary {
  std::size_t leaves = 0;      // I
  std::size_t nodes = 0;       // K
  std::size_t parameters = 0;  // J
  std::vector<FloretSummary> florets;
  std::optional<int> df;  // absent when over-parameterized
};

StructureSummary summarize(const Model& model);

}  // namespace floret
