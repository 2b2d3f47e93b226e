#include "ultrafield/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

#include "ultrafield/error.hpp"

namespace ultrafield {

namespace {

constexpr double kZeroMeanTol = 1e-12;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double positive_lambda(const BallTree& tree, const Spectrum& lambda, VertexId v) {
  const double l = lambda(v);
  if (!(l > 0.0)) {
    throw Error(ErrorKind::ZeroEigenvalue, "eigenvalue at '" + tree.name(v) + "' is " + std::to_string(l));
  }
  return l;
}

void check_length(const BallTree& tree, const LeafVector& f) {
  if (static_cast<std::size_t>(f.size()) != tree.leaf_count()) {
    throw Error(ErrorKind::DimensionMismatch, "leaf vector of length " + std::to_string(f.size()) + " for " +
                                                  std::to_string(tree.leaf_count()) + " leaves");
  }
}

double leaf_measure(const BallTree& tree, Eigen::Index i) {
  return tree.measure(tree.leaf_at(static_cast<std::size_t>(i)));
}

struct Moments {
  double mean = 0.0;  // integral against nu
  double l1 = 0.0;    // integral of |f| against nu
  bool outside = false;
};

Moments moments_in_ball(const BallTree& tree, const LeafVector& f, VertexId ball) {
  Moments m;
  CompensatedSum mean;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const bool inside = static_cast<std::size_t>(i) >= tree.leaf_begin(ball) &&
                        static_cast<std::size_t>(i) < tree.leaf_end(ball);
    if (!inside && f[i] != 0.0) m.outside = true;
    mean.add(f[i] * leaf_measure(tree, i));
    m.l1 += std::abs(f[i]) * leaf_measure(tree, i);
  }
  m.mean = mean.value();
  return m;
}

}  // namespace

double CovarianceKernel::max_abs() const {
  double out = 0.0;
  for (double v : values_) out = std::max(out, std::abs(v));
  return out;
}

void require_positive(const BallTree& tree, const Spectrum& lambda) {
  for (VertexId v : tree.interior()) positive_lambda(tree, lambda, v);
}

double kernel_value(const BallTree& tree, const Spectrum& lambda, VertexId vertex) {
  if (!tree.contains(vertex)) throw Error(ErrorKind::OutOfRange, "vertex is not in this tree");
  double k = 0.0;
  if (!tree.is_leaf(vertex)) {
    const double l = positive_lambda(tree, lambda, vertex);
    k = -1.0 / (l * l * tree.measure(vertex));
  }
  VertexId below = vertex;
  while (!tree.is_root(below)) {
    const VertexId above = tree.parent(below);
    const double l = positive_lambda(tree, lambda, above);
    k += (1.0 / tree.measure(below) - 1.0 / tree.measure(above)) / (l * l);
    below = above;
  }
  return k;
}

CovarianceKernel covariance_kernel(const BallTree& tree, const Spectrum& lambda) {
  require_positive(tree, lambda);
  std::vector<double> tail(tree.vertex_count(), 0.0);
  std::vector<double> k(tree.vertex_count(), 0.0);
  for (std::uint32_t i = 0; i < tree.vertex_count(); ++i) {
    const VertexId v{i};
    if (!tree.is_root(v)) {
      const VertexId p = tree.parent(v);
      const double l = lambda(p);
      tail[i] = tail[p.value] + (1.0 / tree.measure(v) - 1.0 / tree.measure(p)) / (l * l);
    }
    k[i] = tail[i];
    if (!tree.is_leaf(v)) {
      const double l = lambda(v);
      k[i] -= 1.0 / (l * l * tree.measure(v));
    }
  }
  return CovarianceKernel(std::move(k));
}

double kernel_bruteforce(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis,
                         VertexId x, VertexId y) {
  tree.leaf_index(x);
  tree.leaf_index(y);
  double k = 0.0;
  for (const auto& w : basis.wavelets()) {
    const double l = positive_lambda(tree, lambda, w.vertex);
    k += evaluate(tree, w, x) * evaluate(tree, w, y) / (l * l);
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const BallTree& tree, const CovarianceKernel& kernel) {
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = kernel.between(tree, tree.leaf_at(static_cast<std::size_t>(i)),
                                 tree.leaf_at(static_cast<std::size_t>(j)));
    }
  }
  return out;
}

LeafVector synthesize(const BallTree& tree, const WaveletBasis& basis, std::span<const double> weights) {
  const auto wavelets = basis.wavelets();
  if (weights.size() != wavelets.size()) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(weights.size()) + " weights for " +
                                                  std::to_string(wavelets.size()) + " wavelets");
  }
  // Each wavelet is constant on the children of its vertex: collect the
  // per-child increments, then push them down the tree in preorder.
  std::vector<double> level(tree.vertex_count(), 0.0);
  for (std::size_t k = 0; k < wavelets.size(); ++k) {
    const auto kids = tree.children(wavelets[k].vertex);
    for (std::size_t c = 0; c < kids.size(); ++c) level[kids[c].value] += weights[k] * wavelets[k].coeffs[c];
  }
  for (std::uint32_t i = 1; i < tree.vertex_count(); ++i) {
    level[i] += level[tree.parent(VertexId{i}).value];
  }
  LeafVector out(static_cast<Eigen::Index>(tree.leaf_count()));
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) out[static_cast<Eigen::Index>(i)] = level[tree.leaf_at(i).value];
  return out;
}

FieldSample sample_field(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis,
                         std::uint64_t seed, std::uint64_t index) {
  require_positive(tree, lambda);
  RandomStream rng(seed, index);
  FieldSample sample;
  sample.seed = seed;
  sample.index = index;
  const auto wavelets = basis.wavelets();
  sample.coefficients.reserve(wavelets.size());
  std::vector<double> weights;
  weights.reserve(wavelets.size());
  for (const auto& w : wavelets) {
    const double d = rng.normal();
    sample.coefficients.push_back(d);
    weights.push_back(d / lambda(w.vertex));
  }
  sample.values = synthesize(tree, basis, weights);
  return sample;
}

WhiteNoiseSample sample_white_noise(const BallTree& tree, const WaveletBasis& basis, std::uint64_t seed,
                                    std::uint64_t index) {
  RandomStream rng(seed, index);
  WhiteNoiseSample sample;
  sample.seed = seed;
  sample.index = index;
  sample.coefficients.reserve(basis.size());
  for (std::size_t k = 0; k < basis.wavelets().size(); ++k) sample.coefficients.push_back(rng.normal());
  sample.values = synthesize(tree, basis, std::span<const double>(sample.coefficients).first(basis.wavelets().size()));
  if (basis.has_constant_mode()) {
    const double d = rng.normal();
    sample.coefficients.push_back(d);
    sample.values.array() += d * basis.constant_value();
  }
  return sample;
}

double check_equation(const BallTree& tree, const Symbol& symbol, const Spectrum& lambda,
                      const WaveletBasis& basis, std::uint64_t seed) {
  require_positive(tree, lambda);
  const WhiteNoiseSample noise = sample_white_noise(tree, basis, seed);
  const auto wavelets = basis.wavelets();
  const auto d = std::span<const double>(noise.coefficients).first(wavelets.size());
  std::vector<double> weights(wavelets.size());
  for (std::size_t k = 0; k < wavelets.size(); ++k) weights[k] = d[k] / lambda(wavelets[k].vertex);
  const LeafVector psi = synthesize(tree, basis, weights);
  const LeafVector phi_wavelet = synthesize(tree, basis, d);
  const LeafVector residual = apply_dense(tree, symbol, psi) - phi_wavelet;
  return residual.size() == 0 ? 0.0 : residual.cwiseAbs().maxCoeff();
}

double bilinear_form(const BallTree& tree, const CovarianceKernel& kernel, const LeafVector& f,
                     const LeafVector& g) {
  check_length(tree, f);
  check_length(tree, g);
  const Eigen::Index n = f.size();
  CompensatedSum outer;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f[i] == 0.0) continue;
    const VertexId x = tree.leaf_at(static_cast<std::size_t>(i));
    CompensatedSum row;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (g[j] == 0.0) continue;
      const VertexId y = tree.leaf_at(static_cast<std::size_t>(j));
      row.add(g[j] * leaf_measure(tree, j) * kernel.between(tree, x, y));
    }
    outer.add(f[i] * leaf_measure(tree, i) * row.value());
  }
  return outer.value();
}

MarkovCheck markov_check(const BallTree& tree, const CovarianceKernel& kernel, VertexId ball_i,
                         VertexId ball_j, const LeafVector& f, const LeafVector& g) {
  check_length(tree, f);
  check_length(tree, g);
  if (!tree.contains(ball_i) || !tree.contains(ball_j)) {
    throw Error(ErrorKind::OutOfRange, "ball is not a vertex of this tree");
  }
  MarkovCheck check;
  const Moments mf = moments_in_ball(tree, f, ball_i);
  const Moments mg = moments_in_ball(tree, g, ball_j);
  check.value = bilinear_form(tree, kernel, f, g);
  check.scale = mf.l1 * mg.l1 * kernel.max_abs();
  check.disjoint = !tree.within(ball_i, ball_j) && !tree.within(ball_j, ball_i);
  check.supported = !mf.outside && !mg.outside;
  check.zero_mean = std::abs(mf.mean) <= kZeroMeanTol * mf.l1 || std::abs(mg.mean) <= kZeroMeanTol * mg.l1;
  if (!check.disjoint) {
    check.violation = "balls '" + tree.name(ball_i) + "' and '" + tree.name(ball_j) + "' are not disjoint";
  } else if (!check.supported) {
    check.violation = "test function is not supported in its ball";
  } else if (!check.zero_mean) {
    check.violation = "neither test function has zero mean";
  }
  return check;
}

MarkovInstance random_markov_instance(const BallTree& tree, RandomStream& rng) {
  if (tree.leaf_count() < 2) throw Error(ErrorKind::OutOfRange, "need at least two leaves for disjoint balls");
  const auto n = static_cast<std::uint32_t>(tree.vertex_count());
  auto pick = [&rng](const std::vector<VertexId>& from) {
    boost::random::uniform_int_distribution<std::size_t> index(0, from.size() - 1);
    return from[index(rng.engine())];
  };

  // A zero-mean function on an atom is identically zero, so the zero-mean
  // side lives on a non-root interior ball whenever the tree has one.
  std::vector<VertexId> candidates;
  for (VertexId v : tree.interior()) {
    if (!tree.is_root(v)) candidates.push_back(v);
  }
  if (candidates.empty()) {
    for (std::uint32_t k = 1; k < n; ++k) candidates.push_back(VertexId{k});
  }
  const VertexId centered = pick(candidates);
  candidates.clear();
  for (std::uint32_t k = 0; k < n; ++k) {
    const VertexId v{k};
    if (!tree.within(v, centered) && !tree.within(centered, v)) candidates.push_back(v);
  }
  const VertexId other = pick(candidates);

  auto random_in = [&](VertexId ball, bool zero_mean) {
    LeafVector out = LeafVector::Zero(static_cast<Eigen::Index>(tree.leaf_count()));
    if (zero_mean && tree.is_leaf(ball)) return out;
    double mean = 0.0;
    for (std::size_t i = tree.leaf_begin(ball); i < tree.leaf_end(ball); ++i) {
      out[static_cast<Eigen::Index>(i)] = rng.uniform(-1.0, 1.0);
      mean += out[static_cast<Eigen::Index>(i)] * tree.measure(tree.leaf_at(i));
    }
    if (zero_mean) {
      mean /= tree.measure(ball);
      for (std::size_t i = tree.leaf_begin(ball); i < tree.leaf_end(ball); ++i) out[static_cast<Eigen::Index>(i)] -= mean;
    }
    return out;
  };
  LeafVector h_centered = random_in(centered, true);
  LeafVector h_other = random_in(other, !tree.is_leaf(other) && rng.uniform(0.0, 1.0) < 1.0 / 3.0);
  if (rng.uniform(0.0, 1.0) < 0.5) return MarkovInstance{centered, other, std::move(h_centered), std::move(h_other)};
  return MarkovInstance{other, centered, std::move(h_other), std::move(h_centered)};
}

EmpiricalCovariance empirical_covariance(const BallTree& tree, const Spectrum& lambda,
                                         const WaveletBasis& basis, std::size_t samples,
                                         std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorKind::OutOfRange, "sample count must be positive");
  require_positive(tree, lambda);
  const auto n = static_cast<Eigen::Index>(tree.leaf_count());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < samples; ++s) {
    const LeafVector psi = sample_field(tree, lambda, basis, seed, s).values;
    sum.selfadjointView<Eigen::Lower>().rankUpdate(psi);
  }
  EmpiricalCovariance out;
  out.samples = samples;
  out.empirical = sum.selfadjointView<Eigen::Lower>();
  out.empirical /= static_cast<double>(samples);
  out.analytic = kernel_matrix(tree, covariance_kernel(tree, lambda));
  out.standard_error.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double kij = out.analytic(i, j);
      out.standard_error(i, j) =
          std::sqrt((out.analytic(i, i) * out.analytic(j, j) + kij * kij) / static_cast<double>(samples));
      const double dev = std::abs(out.empirical(i, j) - kij);
      const double sigma = dev / out.standard_error(i, j);
      const std::pair<VertexId, VertexId> pair{tree.leaf_at(static_cast<std::size_t>(i)),
                                               tree.leaf_at(static_cast<std::size_t>(j))};
      if (dev > out.max_abs_dev) {
        out.max_abs_dev = dev;
        out.worst_pair = pair;
      }
      if (sigma > out.max_sigma) {
        out.max_sigma = sigma;
        out.worst_sigma_pair = pair;
      }
    }
  }
  return out;
}

KernelReport verify_kernel(const BallTree& tree, const Spectrum& lambda, const WaveletBasis& basis) {
  const CovarianceKernel kernel = covariance_kernel(tree, lambda);
  std::vector<double> path_sum(tree.vertex_count());
  for (std::uint32_t k = 0; k < tree.vertex_count(); ++k) path_sum[k] = kernel_value(tree, lambda, VertexId{k});

  KernelReport report;
  report.scale = std::max(1.0, kernel.max_abs());
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    for (std::size_t j = i; j < tree.leaf_count(); ++j) {
      const VertexId x = tree.leaf_at(i), y = tree.leaf_at(j);
      const VertexId s = sup(tree, x, y);
      const double brute = kernel_bruteforce(tree, lambda, basis, x, y);
      report.max_deviation = std::max({report.max_deviation, std::abs(path_sum[s.value] - brute),
                                       std::abs(kernel(s) - brute)});
      ++report.pairs;
    }
  }
  return report;
}

MarkovReport verify_markov(const BallTree& tree, const CovarianceKernel& kernel, std::size_t trials,
                           std::uint64_t seed) {
  MarkovReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng(seed, t);
    const MarkovInstance instance = random_markov_instance(tree, rng);
    const MarkovCheck check = markov_check(tree, kernel, instance.ball_i, instance.ball_j, instance.f, instance.g);
    if (!check.covered()) ++report.uncovered;
    const double ratio = check.scale > 0.0 ? std::abs(check.value) / check.scale : std::abs(check.value);
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.worst_trial = t;
    }
  }
  return report;
}

}  // namespace ultrafield
