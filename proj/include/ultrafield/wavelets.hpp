#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ultrafield/tree.hpp"

namespace ultrafield {

/// Function on the leaves of a tree, indexed like BallTree::leaves().
using LeafVector = Eigen::VectorXd;

/// Ultrametric wavelet attached to an interior ball: constant on each
/// maximal subball, zero outside the ball, zero mean and unit norm in
/// L2(nu). Stored as one coefficient per child.
struct Wavelet {
  VertexId vertex;
  std::size_t index = 0;  // 1 .. branching(vertex) - 1
  std::vector<double> coeffs;
};

/// Orthonormal basis of L2(X, nu): p_I - 1 wavelets per interior ball
/// (canonical order: interior vertices in preorder, then index) plus the
/// constant mode A^{-1/2}, A the total measure.
class WaveletBasis {
 public:
  std::span<const Wavelet> wavelets() const { return wavelets_; }
  /// Wavelets attached to ball `vertex`; empty for leaves.
  std::span<const Wavelet> at(VertexId vertex) const;

  bool has_constant_mode() const { return has_constant_mode_; }
  double constant_value() const { return constant_value_; }
  /// Number of basis elements, including the constant mode.
  std::size_t size() const { return wavelets_.size() + (has_constant_mode_ ? 1 : 0); }

 private:
  friend WaveletBasis build_basis(const BallTree& tree);

  std::vector<Wavelet> wavelets_;
  std::vector<std::size_t> offset_;
  bool has_constant_mode_ = false;
  double constant_value_ = 0.0;
};

/// Weighted Helmert construction. For children c_1..c_m of I with
/// s_j = nu(c_1) + ... + nu(c_j), wavelet j takes alpha_j / s_j on c_1..c_j,
/// -alpha_j / nu(c_{j+1}) on c_{j+1} and 0 on later children, where
/// alpha_j = (1/s_j + 1/nu(c_{j+1}))^{-1/2}.
WaveletBasis build_basis(const BallTree& tree);

/// Value of `w` at leaf `x`; 0 outside the ball of w.vertex.
double evaluate(const BallTree& tree, const Wavelet& w, VertexId x);

LeafVector to_leaf_vector(const BallTree& tree, const Wavelet& w);

/// Leaf vectors of all basis elements as columns: wavelets in canonical
/// order, then the constant mode.
Eigen::MatrixXd basis_matrix(const BallTree& tree, const WaveletBasis& basis);

/// <f, g> in L2(nu).
double inner(const BallTree& tree, const LeafVector& f, const LeafVector& g);

Eigen::MatrixXd gram_matrix(const BallTree& tree, const WaveletBasis& basis);

/// Max-abs deviation of the Gram matrix from the identity.
double gram_deviation(const BallTree& tree, const WaveletBasis& basis);

struct ProjectorCheck {
  double wavelet_sum = 0.0;     // sum_j psi_Ij(x) psi_Ij(y)
  double projector_value = 0.0; // [x,y in one child c] / nu(c) - [x,y in I] / nu(I)
  bool holds = false;           // |difference| <= 1e-10
};

/// Rank-(p_I - 1) projector identity for the wavelets at I, evaluated at
/// the leaf pair (x, y) by both routes.
ProjectorCheck projector_sum_check(const BallTree& tree, const WaveletBasis& basis, VertexId vertex,
                                   VertexId x, VertexId y);

struct BasisReport {
  std::size_t leaf_count = 0;
  std::size_t wavelet_count = 0;
  double gram_deviation = 0.0;
  std::size_t projector_checks = 0;
  std::size_t projector_failures = 0;
  double max_projector_deviation = 0.0;

  bool passes(double gram_tol) const {
    return gram_deviation <= gram_tol && wavelet_count + 1 == leaf_count && projector_failures == 0;
  }
};

/// Gram matrix, wavelet count, and the projector identity for every
/// (interior I, leaf x, leaf y).
BasisReport verify_basis(const BallTree& tree, const WaveletBasis& basis);

}  // namespace ultrafield
