#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ultrafield/pdo.hpp"
#include "ultrafield/rng.hpp"
#include "ultrafield/tree.hpp"
#include "ultrafield/wavelets.hpp"

namespace ultrafield {

/// Two-point function of psi = T^{-1} phi, one value per vertex: the
/// covariance of psi(x), psi(y) is K(sup(x, y)).
class CovarianceKernel {
 public:
  explicit CovarianceKernel(std::vector<double> by_vertex) : values_(std::move(by_vertex)) {}

  double operator()(VertexId vertex) const { return values_.at(vertex.value); }
  double between(const BallTree& tree, VertexId x, VertexId y) const { return (*this)(sup(tree, x, y)); }
  std::span<const double> by_vertex() const { return values_; }
  double max_abs() const;

 private:
  std::vector<double> values_;
};

/// Path sum for one vertex S:
///   K(S) = -[S interior] lambda_S^-2 / nu(S)
///          + sum_{I > S} lambda_I^-2 (1/nu(child of I toward S) - 1/nu(I)).
/// Throws ZeroEigenvalue if some lambda on the path is not positive.
double kernel_value(const BallTree& tree, const Spectrum& lambda, VertexId vertex);

/// All vertices at once via tail(c) = tail(parent) + lambda_parent^-2 (1/nu(c) - 1/nu(parent)).
CovarianceKernel covariance_kernel(const BallTree& tree, const Spectrum& lambda);

/// Direct sum over wavelets of lambda_I^-2 psi_Ij(x) psi_Ij(y).
double kernel_bruteforce(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis,
                         VertexId x, VertexId y);

/// Leaf-by-leaf matrix K(sup(x, y)).
Eigen::MatrixXd kernel_matrix(const BallTree& tree, const CovarianceKernel& kernel);

struct FieldSample {
  LeafVector values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  /// d_Ij in canonical wavelet order.
  std::vector<double> coefficients;
};

struct WhiteNoiseSample {
  LeafVector values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  /// d_Ij in canonical wavelet order, then the constant-mode coefficient.
  std::vector<double> coefficients;
};

/// psi = sum_Ij lambda_I^-1 d_Ij psi_Ij with d_Ij i.i.d. N(0, 1) drawn from
/// RandomStream(seed, index). Has zero nu-mean.
FieldSample sample_field(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis,
                         std::uint64_t seed, std::uint64_t index = 0);

/// phi = sum over all basis elements of d e. Uses the same stream and draw
/// order as sample_field, so the wavelet coefficients coincide.
WhiteNoiseSample sample_white_noise(const BallTree& tree, const WaveletBasis& basis, std::uint64_t seed,
                                    std::uint64_t index = 0);

/// Leaf values of sum_k weights[k] * wavelet_k.
LeafVector synthesize(const BallTree& tree, const WaveletBasis& basis, std::span<const double> weights);

/// |T psi - phi_wavelet|_inf for psi and phi built from one coefficient draw.
double check_equation(const BallTree& tree, const Symbol& symbol, const Spectrum& lambda,
                      const WaveletBasis& basis, std::uint64_t seed);

/// sum_x sum_y f(x) g(y) K(sup(x, y)) nu(x) nu(y).
double bilinear_form(const BallTree& tree, const CovarianceKernel& kernel, const LeafVector& f,
                     const LeafVector& g);

struct MarkovCheck {
  double value = 0.0;
  /// |f|_1 |g|_1 max|K| with nu-weighted L1 norms.
  double scale = 0.0;
  bool disjoint = false;
  bool supported = false;  // f inside ball I, g inside ball J
  bool zero_mean = false;  // f or g integrates to 0
  std::string violation;   // empty when the instance satisfies the hypotheses

  bool covered() const { return violation.empty(); }
  bool vanishes(double tol = 1e-12) const { return std::abs(value) <= tol * scale; }
};

/// Covariance of <psi, f> and <psi, g> for f supported in ball I and g in
/// ball J. For disjoint balls with a zero-mean f or g it vanishes; otherwise
/// the value is still returned with `violation` describing the failed
/// hypothesis.
MarkovCheck markov_check(const BallTree& tree, const CovarianceKernel& kernel, VertexId ball_i,
                         VertexId ball_j, const LeafVector& f, const LeafVector& g);

struct MarkovInstance {
  VertexId ball_i;
  VertexId ball_j;
  LeafVector f;
  LeafVector g;
};

/// Random pair of disjoint balls with random test functions, at least one
/// of which has zero nu-mean. Needs a tree with at least two leaves.
MarkovInstance random_markov_instance(const BallTree& tree, RandomStream& rng);

struct EmpiricalCovariance {
  Eigen::MatrixXd empirical;
  Eigen::MatrixXd analytic;
  /// Sampling standard error of each entry: sqrt((K_xx K_yy + K_xy^2) / N).
  Eigen::MatrixXd standard_error;
  std::size_t samples = 0;
  double max_abs_dev = 0.0;
  std::pair<VertexId, VertexId> worst_pair{};
  /// max |empirical - analytic| / standard_error over all entries.
  double max_sigma = 0.0;
  std::pair<VertexId, VertexId> worst_sigma_pair{};

  bool within(double sigma_band) const { return max_sigma <= sigma_band; }
};

/// Averages psi(x) psi(y) over samples 0..N-1 of RandomStream(seed, i).
EmpiricalCovariance empirical_covariance(const BallTree& tree, const Spectrum& lambda,
                                         const WaveletBasis& basis, std::size_t samples,
                                         std::uint64_t seed);

struct KernelReport {
  std::size_t pairs = 0;
  /// max over leaf pairs of the gap between the wavelet sum and both the
  /// per-vertex path sum and the all-vertex recurrence.
  double max_deviation = 0.0;
  /// max(1, max|K|); the largest kernel entry is a variance.
  double scale = 1.0;

  bool passes(double tol) const { return max_deviation <= tol * scale; }
};

KernelReport verify_kernel(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis);

struct MarkovReport {
  std::size_t trials = 0;
  /// max |value| / scale over trials.
  double max_ratio = 0.0;
  std::size_t worst_trial = 0;
  std::size_t uncovered = 0;

  bool passes(double tol = 1e-12) const { return uncovered == 0 && max_ratio <= tol; }
};

/// markov_check on `trials` instances; trial t draws from RandomStream(seed, t).
MarkovReport verify_markov(const BallTree& tree, const CovarianceKernel& kernel, std::size_t trials,
                           std::uint64_t seed);

/// Throws ZeroEigenvalue unless every eigenvalue is positive.
void require_positive(const BallTree& tree, const Spectrum& lambda);

}  // namespace ultrafield
