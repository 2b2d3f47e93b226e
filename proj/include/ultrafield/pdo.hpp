#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ultrafield/tree.hpp"
#include "ultrafield/tree_io.hpp"
#include "ultrafield/wavelets.hpp"

namespace ultrafield {

/// Nonnegative function T on interior balls defining the sup-operator
///   (Tf)(x) = sum_{y != x} T(sup(x, y)) (f(x) - f(y)) nu(y).
class Symbol {
 public:
  /// `values` lists T for tree.interior(), in that order.
  Symbol(const BallTree& tree, std::span<const double> values);

  /// Requires a "T" entry on every interior node.
  static Symbol from_document(const TreeDocument& doc);
  static Symbol constant(const BallTree& tree, double value);
  /// T as a function of depth (root depth 0).
  static Symbol by_depth(const BallTree& tree, const std::function<double(std::size_t)>& law);
  /// T(root) uniform in [low, high]; other vertices uniform in [0, high],
  /// or exactly 0 with probability `zero_probability`. Deterministic in seed.
  static Symbol random(const BallTree& tree, std::uint64_t seed, double low, double high,
                       double zero_probability = 0.0);

  double operator()(VertexId vertex) const;
  /// Indexed by vertex id; leaf entries are 0 and never read.
  std::span<const double> by_vertex() const { return values_; }
  double max_value() const;

 private:
  std::vector<double> values_;
  std::vector<bool> interior_;
};

/// Eigenvalue lambda_I of the operator on every wavelet attached to ball I.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> by_vertex) : lambda_(std::move(by_vertex)) {}

  double operator()(VertexId vertex) const;
  /// Indexed by vertex id; NaN at leaves.
  std::span<const double> by_vertex() const { return lambda_; }

 private:
  std::vector<double> lambda_;
};

/// Top-down recurrence: lambda_root = T(root) nu(root) and
/// lambda_c = lambda_parent + nu(c) (T(c) - T(parent)).
Spectrum spectrum(const BallTree& tree, const Symbol& symbol);

/// Path-sum formula for one vertex:
///   lambda_I = T(I) nu(I) + sum_{J > I} T(J) (nu(J) - nu(child of J toward I)).
double eigenvalue_path_sum(const BallTree& tree, const Symbol& symbol, VertexId vertex);

/// Dense O(n^2) realization of the sup-operator on leaf functions.
class DenseOperator {
 public:
  DenseOperator(const BallTree& tree, const Symbol& symbol);

  LeafVector apply(const LeafVector& f) const;
  std::size_t size() const { return static_cast<std::size_t>(weight_.rows()); }

 private:
  // weight_(x, y) = T(sup(x, y)) nu(y) off the diagonal, 0 on it.
  Eigen::MatrixXd weight_;
};

LeafVector apply_dense(const BallTree& tree, const Symbol& symbol, const LeafVector& f);

struct EigenReport {
  /// max over wavelets of |T psi - lambda psi|_inf / max(1, lambda)
  double max_residual = 0.0;
  VertexId worst_vertex{};
  /// |T 1|_inf, and the scale max(T) nu(root) it is judged against.
  double constant_residual = 0.0;
  double constant_scale = 0.0;

  bool passes(double tol) const { return max_residual <= tol && constant_residual <= 1e-12 * constant_scale; }
};

EigenReport verify_eigen(const BallTree& tree, const Symbol& symbol, const WaveletBasis& basis);

/// Level-homogeneous infinite family seen from a fixed ball R: going up k
/// levels multiplies the measure by measure_ratio^k and T by symbol_ratio^k.
struct GeometricFamily {
  int branching = 2;
  double measure_ratio = 2.0;
  double symbol_ratio = 0.25;
  double base_measure = 1.0;  // nu(R)
  double base_symbol = 1.0;   // T(R)
  int levels_probe = 40;
};

struct SeriesVerdict {
  bool evaluated = true;     // false when the series is not defined
  bool converges = false;
  double ratio = 0.0;        // constant term ratio
  double partial_sum = 0.0;  // first levels_probe terms, summed term by term
  double tail = 0.0;         // geometric remainder after the probe (if convergent)
  double value = 0.0;        // partial_sum + tail
  double closed_form = 0.0;  // analytic total (if convergent)
};

struct ConvergenceReport {
  GeometricFamily family;
  SeriesVerdict conv1;  // sum_{J>R} T(J) (nu(J) - nu(J-1,R)): defines every lambda
  SeriesVerdict conv2;  // sum_{I>R} lambda_I^-2 (1/nu(I-1,R) - 1/nu(I)): the kernel tail
};

ConvergenceReport convergence_report(const GeometricFamily& family);

}  // namespace ultrafield
