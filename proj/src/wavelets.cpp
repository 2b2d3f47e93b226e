#include "ultrafield/wavelets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ultrafield/error.hpp"

namespace ultrafield {

namespace {

constexpr double kBuildTol = 1e-12;
constexpr double kCheckTol = 1e-10;

void check_wavelet(const BallTree& tree, const Wavelet& w) {
  const auto kids = tree.children(w.vertex);
  double mean = 0.0, scale = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < kids.size(); ++k) {
    const double nu = tree.measure(kids[k]);
    mean += w.coeffs[k] * nu;
    scale += std::abs(w.coeffs[k]) * nu;
    norm += w.coeffs[k] * w.coeffs[k] * nu;
  }
  if (std::abs(mean) > kBuildTol * scale || std::abs(norm - 1.0) > kBuildTol) {
    throw std::logic_error("wavelet " + std::to_string(w.index) + " at '" + tree.name(w.vertex) +
                           "' failed zero-mean/unit-norm check");
  }
}

}  // namespace

std::span<const Wavelet> WaveletBasis::at(VertexId vertex) const {
  const auto begin = offset_.at(vertex.value);
  return std::span<const Wavelet>(wavelets_).subspan(begin, offset_[vertex.value + 1] - begin);
}

WaveletBasis build_basis(const BallTree& tree) {
  WaveletBasis basis;
  basis.wavelets_.reserve(tree.leaf_count() - 1);
  basis.offset_.assign(tree.vertex_count() + 1, 0);
  for (std::uint32_t k = 0; k < tree.vertex_count(); ++k) {
    const VertexId vertex{k};
    basis.offset_[k] = basis.wavelets_.size();
    const auto kids = tree.children(vertex);
    double prefix = 0.0;
    for (std::size_t j = 1; j < kids.size(); ++j) {
      prefix += tree.measure(kids[j - 1]);
      const double next = tree.measure(kids[j]);
      const double alpha = 1.0 / std::sqrt(1.0 / prefix + 1.0 / next);
      Wavelet w{vertex, j, std::vector<double>(kids.size(), 0.0)};
      for (std::size_t c = 0; c < j; ++c) w.coeffs[c] = alpha / prefix;
      w.coeffs[j] = -alpha / next;
      check_wavelet(tree, w);
      basis.wavelets_.push_back(std::move(w));
    }
  }
  basis.offset_[tree.vertex_count()] = basis.wavelets_.size();
  basis.has_constant_mode_ = true;
  basis.constant_value_ = 1.0 / std::sqrt(tree.total_measure());
  return basis;
}

double evaluate(const BallTree& tree, const Wavelet& w, VertexId x) {
  tree.leaf_index(x);
  if (x == w.vertex || !tree.within(x, w.vertex)) return 0.0;
  return w.coeffs[tree.child_rank(child_toward(tree, w.vertex, x))];
}

LeafVector to_leaf_vector(const BallTree& tree, const Wavelet& w) {
  LeafVector out = LeafVector::Zero(static_cast<Eigen::Index>(tree.leaf_count()));
  const auto kids = tree.children(w.vertex);
  for (std::size_t c = 0; c < kids.size(); ++c) {
    const auto begin = static_cast<Eigen::Index>(tree.leaf_begin(kids[c]));
    const auto end = static_cast<Eigen::Index>(tree.leaf_end(kids[c]));
    out.segment(begin, end - begin).setConstant(w.coeffs[c]);
  }
  return out;
}

Eigen::MatrixXd basis_matrix(const BallTree& tree, const WaveletBasis& basis) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(basis.size()));
  Eigen::Index col = 0;
  for (const auto& w : basis.wavelets()) out.col(col++) = to_leaf_vector(tree, w);
  if (basis.has_constant_mode()) out.col(col).setConstant(basis.constant_value());
  return out;
}

double inner(const BallTree& tree, const LeafVector& f, const LeafVector& g) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  if (f.size() != n || g.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "leaf vector length differs from leaf count " + std::to_string(n));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += f[i] * g[i] * tree.measure(tree.leaf_at(static_cast<std::size_t>(i)));
  return sum;
}

Eigen::MatrixXd gram_matrix(const BallTree& tree, const WaveletBasis& basis) {
  const Eigen::MatrixXd vectors = basis_matrix(tree, basis);
  Eigen::VectorXd weights(vectors.rows());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    weights[i] = tree.measure(tree.leaf_at(static_cast<std::size_t>(i)));
  }
  return vectors.transpose() * weights.asDiagonal() * vectors;
}

double gram_deviation(const BallTree& tree, const WaveletBasis& basis) {
  const Eigen::MatrixXd gram = gram_matrix(tree, basis);
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ProjectorCheck projector_sum_check(const BallTree& tree, const WaveletBasis& basis, VertexId vertex,
                                   VertexId x, VertexId y) {
  if (!tree.contains(vertex) || tree.is_leaf(vertex)) {
    throw Error(ErrorKind::OutOfRange, "projector check needs an interior vertex");
  }
  ProjectorCheck check;
  for (const auto& w : basis.at(vertex)) check.wavelet_sum += evaluate(tree, w, x) * evaluate(tree, w, y);

  if (tree.within(x, vertex) && tree.within(y, vertex)) {
    const VertexId cx = child_toward(tree, vertex, x);
    const VertexId cy = child_toward(tree, vertex, y);
    if (cx == cy) check.projector_value = 1.0 / tree.measure(cx);
    check.projector_value -= 1.0 / tree.measure(vertex);
  }
  const double scale = std::max(1.0, std::abs(check.projector_value));
  check.holds = std::abs(check.wavelet_sum - check.projector_value) <= kCheckTol * scale;
  return check;
}

BasisReport verify_basis(const BallTree& tree, const WaveletBasis& basis) {
  BasisReport report;
  report.leaf_count = tree.leaf_count();
  report.wavelet_count = basis.wavelets().size();
  report.gram_deviation = gram_deviation(tree, basis);
  for (VertexId vertex : tree.interior()) {
    for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
      for (std::size_t j = 0; j < tree.leaf_count(); ++j) {
        const auto check = projector_sum_check(tree, basis, vertex, tree.leaf_at(i), tree.leaf_at(j));
        ++report.projector_checks;
        if (!check.holds) ++report.projector_failures;
        report.max_projector_deviation =
            std::max(report.max_projector_deviation, std::abs(check.wavelet_sum - check.projector_value));
      }
    }
  }
  return report;
}

}  // namespace ultrafield
