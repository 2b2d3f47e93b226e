// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "ultrafield/field.hpp"
#include "ultrafield/pdo.hpp"
#include "ultrafield/wavelets.hpp"

namespace {

using namespace ultrafield;
using Clock = std::chrono::steady_clock;

struct Case {
  std::string label;
  BallTree tree;
  Symbol symbol;
};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Case t2_case() {
  auto doc = testing::t2();
  Symbol symbol = Symbol::from_document(doc);
  return {"T2", std::move(doc.tree), std::move(symbol)};
}

// Random trees (at most max_branching^max_depth leaves) with random
// nonnegative symbols; about a quarter of the non-root symbol values are
// exactly zero. A high split probability pushes trees toward the leaf cap.
std::vector<Case> random_cases(int count, int max_depth, int max_branching) {
  std::vector<Case> out;
  for (int seed = 1; seed <= count; ++seed) {
    auto tree = testing::random_tree(static_cast<std::uint64_t>(seed), max_depth, max_branching, 0.9);
    auto symbol = Symbol::random(tree, static_cast<std::uint64_t>(seed), 0.1, 2.0, 0.25);
    out.push_back({"seed " + std::to_string(seed), std::move(tree), std::move(symbol)});
  }
  return out;
}

std::vector<Case> standard_cases() {
  std::vector<Case> cases;
  cases.push_back(t2_case());
  for (auto& c : random_cases(50, 4, 4)) cases.push_back(std::move(c));
  auto full = generate_homogeneous(4, 4, 1.0);
  auto symbol = Symbol::random(full, 256, 0.1, 2.0, 0.25);
  cases.push_back({"homogeneous 4^4", std::move(full), std::move(symbol)});
  return cases;
}

Outcome criterion_eigen() {
  const auto start = Clock::now();
  double worst = 0.0, worst_constant = 0.0;
  std::size_t max_leaves = 0;
  std::string where;
  bool constants_ok = true;
  for (const auto& c : standard_cases()) {
    max_leaves = std::max(max_leaves, c.tree.leaf_count());
    const auto report = verify_eigen(c.tree, c.symbol, build_basis(c.tree));
    if (report.max_residual > worst) {
      worst = report.max_residual;
      where = c.label;
    }
    const double relative = report.constant_scale > 0.0 ? report.constant_residual / report.constant_scale : 0.0;
    worst_constant = std::max(worst_constant, relative);
    constants_ok = constants_ok && report.constant_residual <= 1e-12 * report.constant_scale;
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  Outcome out;
  out.pass = worst <= 1e-9 && constants_ok && seconds <= 10.0 && max_leaves <= 256;
  out.detail = fmt("max residual %.3g (tol 1e-9), constant residual/scale %.3g (tol 1e-12), %.2f s (limit 10 s)",
                   worst, worst_constant, seconds) +
               ", worst on " + where + ", largest tree " + std::to_string(max_leaves) + " leaves";
  return out;
}

Outcome criterion_spectrum() {
  double worst = 0.0;
  std::size_t max_leaves = 0;
  auto cases = random_cases(50, 3, 5);
  auto full = generate_homogeneous(2, 7, 1.0);
  auto symbol = Symbol::random(full, 128, 0.1, 2.0, 0.25);
  cases.push_back({"homogeneous 2^7", std::move(full), std::move(symbol)});
  for (const auto& c : cases) {
    max_leaves = std::max(max_leaves, c.tree.leaf_count());
    const auto dense = testing::dense_eigenvalues(c.tree, c.symbol);
    const auto expected = testing::expected_multiset(c.tree, spectrum(c.tree, c.symbol));
    if (dense.size() != expected.size()) return {false, "multiset size mismatch on " + c.label};
    for (std::size_t k = 0; k < dense.size(); ++k) worst = std::max(worst, std::abs(dense[k] - expected[k]));
  }
  const auto t2 = t2_case();
  const auto lambda = spectrum(t2.tree, t2.symbol);
  const double anchor = std::max({std::abs(lambda(t2.tree.at("R")) - 1.0), std::abs(lambda(t2.tree.at("A")) - 1.5),
                                  std::abs(lambda(t2.tree.at("B")) - 1.5)});
  Outcome out;
  out.pass = worst <= 1e-8 && anchor <= 1e-12 && max_leaves <= 128;
  out.detail = fmt("max multiset gap %.3g (tol 1e-8) over 51 trees, T2 anchor error %.3g (tol 1e-12)", worst, anchor) +
               ", largest tree " + std::to_string(max_leaves) + " leaves";
  return out;
}

Outcome criterion_kernel() {
  double worst = 0.0;
  std::size_t pairs = 0;
  bool ok = true;
  for (const auto& c : standard_cases()) {
    const auto report = verify_kernel(c.tree, spectrum(c.tree, c.symbol), build_basis(c.tree));
    worst = std::max(worst, report.max_deviation / report.scale);
    pairs += report.pairs;
    ok = ok && report.passes(1e-10);
  }
  const auto t2 = t2_case();
  const auto kernel = covariance_kernel(t2.tree, spectrum(t2.tree, t2.symbol));
  const double anchor = std::max({std::abs(kernel(t2.tree.at("A")) - 1.0 / 9.0), std::abs(kernel(t2.tree.at("R")) + 1.0),
                                  std::abs(kernel(t2.tree.at("a1")) - 17.0 / 9.0)});
  Outcome out;
  out.pass = ok && anchor <= 1e-12;
  out.detail = fmt("max deviation/scale %.3g (tol 1e-10) over %.0f leaf pairs, T2 anchor error %.3g (tol 1e-12)", worst,
                   static_cast<double>(pairs), anchor);
  return out;
}

Outcome criterion_monte_carlo() {
  const auto start = Clock::now();
  const auto t2 = t2_case();
  const auto cov =
      empirical_covariance(t2.tree, spectrum(t2.tree, t2.symbol), build_basis(t2.tree), 200000, 0);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  Outcome out;
  out.pass = cov.within(5.0) && seconds <= 60.0;
  out.detail = fmt("N = 200000, seed 0: max |emp - K|/SE %.3g (band 5), max |emp - K| %.3g, %.2f s (limit 60 s)",
                   cov.max_sigma, cov.max_abs_dev, seconds);
  return out;
}

Outcome criterion_equation() {
  double worst = 0.0;
  std::vector<Case> cases;
  cases.push_back(t2_case());
  for (auto& c : random_cases(20, 4, 4)) cases.push_back(std::move(c));
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    worst = std::max(worst, check_equation(c.tree, c.symbol, spectrum(c.tree, c.symbol), build_basis(c.tree), k));
  }
  return {worst <= 1e-9, fmt("max residual %.3g (tol 1e-9) on T2 + 20 random trees", worst)};
}

Outcome criterion_markov() {
  // Analytic part: 1000 instances spread over 20 random trees.
  double worst = 0.0;
  std::size_t uncovered = 0, trials = 0;
  for (const auto& c : random_cases(20, 4, 4)) {
    const auto kernel = covariance_kernel(c.tree, spectrum(c.tree, c.symbol));
    const auto report = verify_markov(c.tree, kernel, 50, 1000 + trials);
    worst = std::max(worst, report.max_ratio);
    uncovered += report.uncovered;
    trials += report.trials;
  }

  // Monte Carlo part on T2: I = A, J = B, f = chi_a1 - chi_a2, g = chi_b1.
  const auto t2 = t2_case();
  const auto& tree = t2.tree;
  const auto lambda = spectrum(tree, t2.symbol);
  const auto basis = build_basis(tree);
  const auto kernel = covariance_kernel(tree, lambda);
  LeafVector f = LeafVector::Zero(4), g = LeafVector::Zero(4);
  f[static_cast<Eigen::Index>(tree.leaf_index(tree.at("a1")))] = 1.0;
  f[static_cast<Eigen::Index>(tree.leaf_index(tree.at("a2")))] = -1.0;
  g[static_cast<Eigen::Index>(tree.leaf_index(tree.at("b1")))] = 1.0;
  const auto analytic = markov_check(tree, kernel, tree.at("A"), tree.at("B"), f, g);
  constexpr std::size_t kN = 100000;
  double sum = 0.0;
  for (std::size_t s = 0; s < kN; ++s) {
    const LeafVector psi = sample_field(tree, lambda, basis, 6, s).values;
    sum += inner(tree, psi, f) * inner(tree, psi, g);
  }
  const double empirical = sum / kN;
  const double var_f = bilinear_form(tree, kernel, f, f), var_g = bilinear_form(tree, kernel, g, g);
  const double se = std::sqrt((var_f * var_g + analytic.value * analytic.value) / kN);
  const double sigmas = std::abs(empirical) / se;

  Outcome out;
  out.pass = trials == 1000 && uncovered == 0 && worst <= 1e-12 && analytic.covered() && sigmas <= 5.0;
  out.detail = fmt("max |value|/scale %.3g (tol 1e-12) over %.0f instances, ", worst, static_cast<double>(trials)) +
               std::to_string(uncovered) + " uncovered; T2 MC N = 100000: |cov| = " +
               fmt("%.3g = %.3g SE (band 5)", std::abs(empirical), sigmas);
  return out;
}

Outcome criterion_basis() {
  std::vector<BallTree> trees;
  trees.push_back(testing::t2().tree);
  trees.push_back(generate_homogeneous(3, 3, 1.0));
  trees.push_back(generate_homogeneous(2, 6, 1.0));
  trees.push_back(generate_homogeneous(4, 3, 1.0));
  for (std::uint64_t seed = 1; seed <= 50; ++seed) trees.push_back(testing::random_tree(seed, 3, 4, 0.9));
  double gram = 0.0, projector = 0.0;
  std::size_t checks = 0, failures = 0, count_errors = 0, max_leaves = 0;
  for (const auto& tree : trees) {
    max_leaves = std::max(max_leaves, tree.leaf_count());
    const auto report = verify_basis(tree, build_basis(tree));
    gram = std::max(gram, report.gram_deviation);
    projector = std::max(projector, report.max_projector_deviation);
    checks += report.projector_checks;
    failures += report.projector_failures;
    if (report.wavelet_count + 1 != report.leaf_count) ++count_errors;
  }
  Outcome out;
  out.pass = gram <= 1e-10 && failures == 0 && count_errors == 0 && max_leaves <= 64;
  out.detail = fmt("Gram deviation %.3g (tol 1e-10), projector max deviation %.3g over %.0f (I, x, y) triples, ", gram,
                   projector, static_cast<double>(checks)) +
               std::to_string(failures) + " failures, " + std::to_string(count_errors) + " count errors on " +
               std::to_string(trees.size()) + " trees";
  return out;
}

Outcome criterion_convergence() {
  auto report_for = [](double q) {
    GeometricFamily family;
    family.measure_ratio = 2.0;
    family.symbol_ratio = q;
    family.levels_probe = 40;
    return convergence_report(family);
  };
  bool verdicts = true;
  // The flip point and its immediate floating-point neighbours.
  for (double q : {std::nextafter(0.5, 0.0), 0.5, std::nextafter(0.5, 1.0), 0.0, 0.1, 0.49, 0.51, 1.0, 2.0}) {
    const auto r = report_for(q);
    verdicts = verdicts && r.conv1.converges == (q * 2.0 < 1.0);
  }
  double worst = 0.0;
  for (double qmu = 0.05; qmu < 0.99; qmu += 0.05) {
    const auto r = report_for(qmu / 2.0);
    const auto gap = [](const SeriesVerdict& s) {
      return std::abs(s.value - s.closed_form) / std::max(1.0, std::abs(s.closed_form));
    };
    worst = std::max(worst, gap(r.conv1));
    if (r.conv2.converges) worst = std::max(worst, gap(r.conv2));
  }
  Outcome out;
  out.pass = verdicts && worst <= 1e-10;
  out.detail = std::string("conv1 verdict flips at q mu = 1 (mu = 2): ") + (verdicts ? "yes" : "no") +
               fmt(", 40-level probe vs closed form max gap %.3g (tol 1e-10)", worst);
  return out;
}

Outcome criterion_sup_dependence() {
  std::size_t groups = 0, mismatches = 0;
  double brute = 0.0;
  for (const auto& c : standard_cases()) {
    const auto lambda = spectrum(c.tree, c.symbol);
    const auto basis = build_basis(c.tree);
    const auto recurrence = covariance_kernel(c.tree, lambda);
    const double scale = std::max(1.0, recurrence.max_abs());
    std::map<std::uint32_t, double> first;
    for (std::size_t i = 0; i < c.tree.leaf_count(); ++i) {
      for (std::size_t j = i; j < c.tree.leaf_count(); ++j) {
        const VertexId x = c.tree.leaf_at(i), y = c.tree.leaf_at(j);
        const VertexId s = sup(c.tree, x, y);
        const double value = kernel_value(c.tree, lambda, s);
        const auto [it, inserted] = first.emplace(s.value, value);
        if (!inserted && std::memcmp(&it->second, &value, sizeof value) != 0) ++mismatches;
        if (recurrence.between(c.tree, x, y) != recurrence(s)) ++mismatches;
        brute = std::max(brute, std::abs(value - kernel_bruteforce(c.tree, lambda, basis, x, y)) / scale);
      }
    }
    groups += first.size();
  }
  Outcome out;
  out.pass = mismatches == 0 && brute <= 1e-10;
  out.detail = std::to_string(mismatches) + " non-identical values across " + std::to_string(groups) +
               " sup groups, bruteforce max deviation/scale " + fmt("%.3g (tol 1e-10)", brute);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"eigenrelation", criterion_eigen},         {"spectrum closed form", criterion_spectrum},
      {"covariance formula", criterion_kernel},    {"Monte Carlo law", criterion_monte_carlo},
      {"stochastic equation", criterion_equation}, {"Markovianity", criterion_markov},
      {"basis integrity", criterion_basis},        {"convergence diagnostics", criterion_convergence},
      {"sup-dependence", criterion_sup_dependence}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("criterion %zu (%s): %s  %s\n", k + 1, criteria[k].first.c_str(), outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
