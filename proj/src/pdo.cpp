#include "ultrafield/pdo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ultrafield/error.hpp"
#include "ultrafield/rng.hpp"

namespace ultrafield {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Symbol::Symbol(const BallTree& tree, std::span<const double> values)
    : values_(tree.vertex_count(), 0.0), interior_(tree.vertex_count(), false) {
  const auto interior = tree.interior();
  if (values.size() != interior.size()) {
    throw Error(ErrorKind::DimensionMismatch, "symbol has " + std::to_string(values.size()) +
                                                  " values for " + std::to_string(interior.size()) +
                                                  " interior vertices");
  }
  for (std::size_t k = 0; k < interior.size(); ++k) {
    const double t = values[k];
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorKind::NegativeSymbol, "T('" + tree.name(interior[k]) + "') = " + std::to_string(t) +
                                                 " is not a finite nonnegative number");
    }
    values_[interior[k].value] = t;
    interior_[interior[k].value] = true;
  }
}

Symbol Symbol::from_document(const TreeDocument& doc) {
  std::vector<double> values;
  for (VertexId v : doc.tree.interior()) {
    const auto& entry = doc.symbol[v.value];
    if (!entry) throw Error(ErrorKind::MissingSymbol, "interior node '" + doc.tree.name(v) + "' has no 'T'");
    values.push_back(*entry);
  }
  return Symbol(doc.tree, values);
}

Symbol Symbol::constant(const BallTree& tree, double value) {
  return Symbol(tree, std::vector<double>(tree.interior_count(), value));
}

Symbol Symbol::by_depth(const BallTree& tree, const std::function<double(std::size_t)>& law) {
  std::vector<double> values;
  values.reserve(tree.interior_count());
  for (VertexId v : tree.interior()) values.push_back(law(tree.depth(v)));
  return Symbol(tree, values);
}

Symbol Symbol::random(const BallTree& tree, std::uint64_t seed, double low, double high,
                      double zero_probability) {
  if (!(low > 0.0) || !(high >= low) || !std::isfinite(high)) {
    throw Error(ErrorKind::OutOfRange, "random symbol needs 0 < low <= high");
  }
  RandomStream rng(seed, 0x73796d626f6cULL);
  std::vector<double> values;
  values.reserve(tree.interior_count());
  for (VertexId v : tree.interior()) {
    if (tree.is_root(v)) {
      values.push_back(rng.uniform(low, high));
    } else if (rng.uniform(0.0, 1.0) < zero_probability) {
      values.push_back(0.0);
    } else {
      values.push_back(rng.uniform(0.0, high));
    }
  }
  return Symbol(tree, values);
}

double Symbol::operator()(VertexId vertex) const {
  if (vertex.value >= interior_.size() || !interior_[vertex.value]) {
    throw Error(ErrorKind::OutOfRange, "symbol is defined on interior vertices only");
  }
  return values_[vertex.value];
}

double Symbol::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double Spectrum::operator()(VertexId vertex) const {
  if (vertex.value >= lambda_.size() || std::isnan(lambda_[vertex.value])) {
    throw Error(ErrorKind::OutOfRange, "eigenvalues are attached to interior vertices only");
  }
  return lambda_[vertex.value];
}

Spectrum spectrum(const BallTree& tree, const Symbol& symbol) {
  std::vector<double> lambda(tree.vertex_count(), kNaN);
  // Preorder: parents are finished before their children.
  for (VertexId v : tree.interior()) {
    if (tree.is_root(v)) {
      lambda[v.value] = symbol(v) * tree.measure(v);
    } else {
      const VertexId p = tree.parent(v);
      lambda[v.value] = lambda[p.value] + tree.measure(v) * (symbol(v) - symbol(p));
    }
  }
  return Spectrum(std::move(lambda));
}

double eigenvalue_path_sum(const BallTree& tree, const Symbol& symbol, VertexId vertex) {
  double lambda = symbol(vertex) * tree.measure(vertex);
  VertexId below = vertex;
  while (!tree.is_root(below)) {
    const VertexId above = tree.parent(below);
    lambda += symbol(above) * (tree.measure(above) - tree.measure(below));
    below = above;
  }
  return lambda;
}

DenseOperator::DenseOperator(const BallTree& tree, const Symbol& symbol) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  weight_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VertexId x = tree.leaf_at(static_cast<std::size_t>(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const VertexId y = tree.leaf_at(static_cast<std::size_t>(j));
      const double t = symbol(sup(tree, x, y));
      weight_(i, j) = t * tree.measure(y);
      weight_(j, i) = t * tree.measure(x);
    }
  }
}

LeafVector DenseOperator::apply(const LeafVector& f) const {
  const Eigen::Index n = weight_.rows();
  if (f.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "leaf vector of length " + std::to_string(f.size()) +
                                                  " for " + std::to_string(n) + " leaves");
  }
  LeafVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += weight_(i, j) * (f[i] - f[j]);
    out[i] = sum;
  }
  return out;
}

LeafVector apply_dense(const BallTree& tree, const Symbol& symbol, const LeafVector& f) {
  return DenseOperator(tree, symbol).apply(f);
}

EigenReport verify_eigen(const BallTree& tree, const Symbol& symbol, const WaveletBasis& basis) {
  const DenseOperator op(tree, symbol);
  const Spectrum lambda = spectrum(tree, symbol);
  EigenReport report;
  report.worst_vertex = tree.root();
  for (const auto& w : basis.wavelets()) {
    const LeafVector psi = to_leaf_vector(tree, w);
    const double l = lambda(w.vertex);
    const double residual = (op.apply(psi) - l * psi).cwiseAbs().maxCoeff() / std::max(1.0, l);
    if (residual > report.max_residual) {
      report.max_residual = residual;
      report.worst_vertex = w.vertex;
    }
  }
  const LeafVector ones = LeafVector::Ones(static_cast<Eigen::Index>(tree.leaf_count()));
  report.constant_residual = op.apply(ones).cwiseAbs().maxCoeff();
  report.constant_scale = symbol.max_value() * tree.total_measure();
  return report;
}

ConvergenceReport convergence_report(const GeometricFamily& family) {
  if (family.branching < 2) throw Error(ErrorKind::OutOfRange, "branching must be >= 2");
  if (!(family.measure_ratio > 1.0) || !std::isfinite(family.measure_ratio)) {
    throw Error(ErrorKind::OutOfRange, "measure ratio must be > 1");
  }
  if (!(family.symbol_ratio >= 0.0) || !std::isfinite(family.symbol_ratio)) {
    throw Error(ErrorKind::OutOfRange, "symbol ratio must be >= 0");
  }
  if (!(family.base_measure > 0.0) || !(family.base_symbol > 0.0)) {
    throw Error(ErrorKind::OutOfRange, "base measure and base symbol must be positive");
  }
  if (family.levels_probe < 1) throw Error(ErrorKind::OutOfRange, "levels_probe must be >= 1");

  const double mu = family.measure_ratio;
  const double q = family.symbol_ratio;
  const int levels = family.levels_probe;

  ConvergenceReport report{family, {}, {}};

  // conv1: term_k = T_k (nu_k - nu_{k-1}), ratio q mu.
  auto& c1 = report.conv1;
  c1.ratio = q * mu;
  c1.converges = c1.ratio < 1.0;
  const double first1 = family.base_symbol * q * family.base_measure * (mu - 1.0);
  double nu = family.base_measure, t = family.base_symbol, term1 = 0.0;
  for (int k = 1; k <= levels; ++k) {
    const double nu_next = nu * mu;
    t *= q;
    term1 = t * (nu_next - nu);
    c1.partial_sum += term1;
    nu = nu_next;
  }
  if (c1.converges) {
    c1.tail = term1 * c1.ratio / (1.0 - c1.ratio);
    c1.value = c1.partial_sum + c1.tail;
    c1.closed_form = first1 / (1.0 - c1.ratio);
  } else {
    c1.value = kInf;
    c1.closed_form = kInf;
  }

  auto& c2 = report.conv2;
  if (!c1.converges) {
    // No eigenvalue is finite; the kernel series is undefined.
    c2.evaluated = false;
    return report;
  }

  // lambda_k = T_k nu_k + (conv1 remainder above level k) = lambda_0 r^k.
  const double r = c1.ratio;
  const double lambda0 = family.base_symbol * family.base_measure * (1.0 + (1.0 - 1.0 / mu) * r / (1.0 - r));
  auto lambda_at = [&](double nu_k, double t_k) {
    const double next_term = t_k * q * (nu_k * mu - nu_k);
    return t_k * nu_k + next_term / (1.0 - r);
  };

  c2.ratio = r > 0.0 ? 1.0 / (r * r * mu) : kInf;
  c2.converges = c2.ratio < 1.0;
  nu = family.base_measure;
  t = family.base_symbol;
  double term2 = 0.0;
  for (int k = 1; k <= levels; ++k) {
    const double nu_next = nu * mu;
    t *= q;
    const double lambda = lambda_at(nu_next, t);
    term2 = lambda > 0.0 ? (1.0 / nu - 1.0 / nu_next) / (lambda * lambda) : kInf;
    c2.partial_sum += term2;
    nu = nu_next;
  }
  if (c2.converges) {
    const double first2 = (1.0 / family.base_measure) * (1.0 - 1.0 / mu) / (lambda0 * lambda0 * r * r);
    c2.tail = term2 * c2.ratio / (1.0 - c2.ratio);
    c2.value = c2.partial_sum + c2.tail;
    c2.closed_form = first2 / (1.0 - c2.ratio);
  } else {
    c2.value = kInf;
    c2.closed_form = kInf;
  }
  return report;
}

}  // namespace ultrafield
