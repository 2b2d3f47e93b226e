#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ultrafield/pdo.hpp"
#include "ultrafield/tree.hpp"
#include "ultrafield/tree_io.hpp"

namespace ultrafield::testing {

inline std::string data_path(const std::string& file) { return std::string(ULTRAFIELD_DATA_DIR) + "/" + file; }

inline TreeDocument t2() { return load_tree(data_path("T2.json")); }

inline VertexId v(const BallTree& tree, const std::string& name) { return tree.at(name); }

/// Random trees with at most 4^4 = 256 leaves.
inline BallTree random_tree(std::uint64_t seed, int max_depth = 4, int max_branching = 4, double split = 0.6) {
  return generate_random(seed, RandomTreeParams{max_depth, max_branching, 0.1, 1.0, split});
}

/// Generated vertices are named by their dotted child path from "R", so the
/// lowest common ancestor is the longest common dotted prefix.
inline std::string prefix_lca(const std::string& a, const std::string& b) {
  auto split = [](const std::string& name) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = name.find('.', start);
      parts.push_back(name.substr(start, dot - start));
      if (dot == std::string::npos) return parts;
      start = dot + 1;
    }
  };
  const auto pa = split(a), pb = split(b);
  std::string out = pa[0];
  for (std::size_t i = 1; i < std::min(pa.size(), pb.size()) && pa[i] == pb[i]; ++i) out += "." + pa[i];
  return out;
}

/// Eigenvalues of the operator matrix assembled column by column from
/// apply_dense on leaf indicators, symmetrized by the measure.
inline std::vector<double> dense_eigenvalues(const BallTree& tree, const Symbol& symbol) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  Eigen::MatrixXd op(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    op.col(j) = apply_dense(tree, symbol, e);
  }
  Eigen::VectorXd root_nu(n);
  for (Eigen::Index i = 0; i < n; ++i) root_nu[i] = std::sqrt(tree.measure(tree.leaf_at(static_cast<std::size_t>(i))));
  Eigen::MatrixXd sym = root_nu.asDiagonal() * op * root_nu.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

/// lambda_I with multiplicity p_I - 1, plus 0 for the constants, sorted.
inline std::vector<double> expected_multiset(const BallTree& tree, const Spectrum& lambda) {
  std::vector<double> out{0.0};
  for (VertexId v : tree.interior()) out.insert(out.end(), tree.branching(v) - 1, lambda(v));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ultrafield::testing
