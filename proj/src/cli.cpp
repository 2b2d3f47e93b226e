#include "ultrafield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ultrafield/error.hpp"
#include "ultrafield/field.hpp"
#include "ultrafield/pdo.hpp"
#include "ultrafield/tree.hpp"
#include "ultrafield/tree_io.hpp"
#include "ultrafield/wavelets.hpp"

namespace ultrafield::cli {

namespace {

std::string number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string quoted(const std::string& text) { return nlohmann::json(text).dump(); }

/// Flat JSON object writer; doubles get 17 significant digits, non-finite
/// values become null.
class JsonObject {
 public:
  JsonObject& field(const std::string& key, double value) {
    return raw(key, std::isfinite(value) ? number(value) : "null");
  }
  JsonObject& field(const std::string& key, std::size_t value) { return raw(key, std::to_string(value)); }
  JsonObject& field(const std::string& key, int value) { return raw(key, std::to_string(value)); }
  JsonObject& field(const std::string& key, bool value) { return raw(key, value ? "true" : "false"); }
  JsonObject& field(const std::string& key, const std::string& value) { return raw(key, quoted(value)); }
  JsonObject& field(const std::string& key, const char* value) { return raw(key, quoted(value)); }
  JsonObject& raw(const std::string& key, const std::string& json) {
    body_ << (empty_ ? "" : ", ") << quoted(key) << ": " << json;
    empty_ = false;
    return *this;
  }
  std::string str() const { return "{" + body_.str() + "}"; }

 private:
  std::ostringstream body_;
  bool empty_ = true;
};

std::string pair_json(const BallTree& tree, std::pair<VertexId, VertexId> pair) {
  return "[" + quoted(tree.name(pair.first)) + ", " + quoted(tree.name(pair.second)) + "]";
}

struct Input {
  std::string name;
  BallTree tree;
  std::optional<Symbol> symbol;
  std::string symbol_problem;

  const Symbol& require_symbol() const {
    if (!symbol) throw Error(ErrorKind::MissingSymbol, symbol_problem);
    return *symbol;
  }
};

Input load_input(const RunConfig& config) {
  if (!config.generate.empty()) {
    int p = 0, depth = 0;
    double measure = 0.0;
    char tail = 0;
    if (std::sscanf(config.generate.c_str(), "%d:%d:%lf%c", &p, &depth, &measure, &tail) != 3) {
      throw Error(ErrorKind::MalformedSpec, "--gen expects p:depth:measure, got '" + config.generate + "'");
    }
    BallTree tree = generate_homogeneous(p, depth, measure);
    Symbol symbol = Symbol::by_depth(
        tree, [&](std::size_t d) { return config.t_root * std::pow(config.t_ratio, static_cast<double>(d)); });
    return Input{"gen-" + config.generate, std::move(tree), std::move(symbol), {}};
  }
  if (config.input.empty()) throw Error(ErrorKind::MalformedSpec, "no tree file given (or use --gen)");
  TreeDocument doc = load_tree(config.input);
  std::optional<Symbol> symbol;
  std::string problem;
  try {
    symbol = Symbol::from_document(doc);
  } catch (const Error& e) {
    problem = e.what();
  }
  return Input{doc.name, std::move(doc.tree), std::move(symbol), problem};
}

int cmd_validate(const Input& in, std::ostream& out) {
  out << JsonObject()
             .field("name", in.name)
             .field("vertices", in.tree.vertex_count())
             .field("leaves", in.tree.leaf_count())
             .field("interior", in.tree.interior_count())
             .field("height", in.tree.height())
             .field("total_measure", in.tree.total_measure())
             .field("has_symbol", in.symbol.has_value())
             .str()
      << "\n";
  return kSuccess;
}

int cmd_spectrum(const Input& in, std::ostream& out) {
  const Symbol& symbol = in.require_symbol();
  const Spectrum lambda = spectrum(in.tree, symbol);
  out << "vertex_id,depth,nu,T,lambda\n";
  for (VertexId v : in.tree.interior()) {
    out << in.tree.name(v) << ',' << in.tree.depth(v) << ',' << number(in.tree.measure(v)) << ','
        << number(symbol(v)) << ',' << number(lambda(v)) << '\n';
  }
  return kSuccess;
}

int cmd_wavelets(const Input& in, std::ostream& out) {
  const WaveletBasis basis = build_basis(in.tree);
  out << "vertex_id,j,child_id,coefficient\n";
  // The constant mode is listed as j = 0 at the root.
  const VertexId root = in.tree.root();
  if (in.tree.is_leaf(root)) {
    out << in.tree.name(root) << ",0," << in.tree.name(root) << ',' << number(basis.constant_value()) << '\n';
  } else {
    for (VertexId c : in.tree.children(root)) {
      out << in.tree.name(root) << ",0," << in.tree.name(c) << ',' << number(basis.constant_value()) << '\n';
    }
  }
  for (const auto& w : basis.wavelets()) {
    const auto kids = in.tree.children(w.vertex);
    for (std::size_t c = 0; c < kids.size(); ++c) {
      out << in.tree.name(w.vertex) << ',' << w.index << ',' << in.tree.name(kids[c]) << ','
          << number(w.coeffs[c]) << '\n';
    }
  }
  return kSuccess;
}

int cmd_kernel(const RunConfig& config, const Input& in, std::ostream& out) {
  const CovarianceKernel kernel = covariance_kernel(in.tree, spectrum(in.tree, in.require_symbol()));
  if (config.pairs == "profile") {
    out << "vertex_id,depth,distance,K\n";
    for (std::uint32_t k = 0; k < in.tree.vertex_count(); ++k) {
      const VertexId v{k};
      const double d = in.tree.is_leaf(v) ? 0.0 : in.tree.measure(v);
      out << in.tree.name(v) << ',' << in.tree.depth(v) << ',' << number(d) << ',' << number(kernel(v)) << '\n';
    }
    return kSuccess;
  }
  out << "x,y,sup_vertex,K\n";
  for (std::size_t i = 0; i < in.tree.leaf_count(); ++i) {
    for (std::size_t j = i; j < in.tree.leaf_count(); ++j) {
      const VertexId x = in.tree.leaf_at(i), y = in.tree.leaf_at(j);
      const VertexId s = sup(in.tree, x, y);
      out << in.tree.name(x) << ',' << in.tree.name(y) << ',' << in.tree.name(s) << ',' << number(kernel(s)) << '\n';
    }
  }
  return kSuccess;
}

int cmd_sample(const RunConfig& config, const Input& in, std::ostream& out) {
  const Spectrum lambda = spectrum(in.tree, in.require_symbol());
  const WaveletBasis basis = build_basis(in.tree);
  out << "sample_index,leaf_id,value\n";
  for (std::size_t s = 0; s < config.count; ++s) {
    const FieldSample sample = sample_field(in.tree, lambda, basis, config.seed, s);
    for (std::size_t i = 0; i < in.tree.leaf_count(); ++i) {
      out << s << ',' << in.tree.name(in.tree.leaf_at(i)) << ',' << number(sample.values[static_cast<Eigen::Index>(i)])
          << '\n';
    }
  }
  return kSuccess;
}

int cmd_mc_cov(const RunConfig& config, const Input& in, std::ostream& out) {
  const Spectrum lambda = spectrum(in.tree, in.require_symbol());
  const WaveletBasis basis = build_basis(in.tree);
  const EmpiricalCovariance cov = empirical_covariance(in.tree, lambda, basis, config.count, config.seed);
  const bool pass = cov.within(config.sigma_band);
  out << JsonObject()
             .field("samples", cov.samples)
             .field("seed", static_cast<std::size_t>(config.seed))
             .field("max_abs_dev", cov.max_abs_dev)
             .raw("worst_pair", pair_json(in.tree, cov.worst_pair))
             .field("max_sigma", cov.max_sigma)
             .raw("worst_sigma_pair", pair_json(in.tree, cov.worst_sigma_pair))
             .field("tol_sigma", config.sigma_band)
             .field("pass", pass)
             .str()
      << "\n";
  return pass ? kSuccess : kVerificationFailed;
}

int cmd_convergence(const RunConfig& config, std::ostream& out) {
  GeometricFamily family;
  family.branching = config.branching;
  family.measure_ratio = config.measure_ratio;
  family.symbol_ratio = config.symbol_ratio;
  family.levels_probe = config.levels;
  const ConvergenceReport report = convergence_report(family);
  auto series = [](const SeriesVerdict& s) {
    return JsonObject()
        .field("evaluated", s.evaluated)
        .field("converges", s.converges)
        .field("ratio", s.ratio)
        .field("partial_sum", s.partial_sum)
        .field("tail", s.tail)
        .field("value", s.value)
        .field("closed_form", s.closed_form)
        .str();
  };
  out << JsonObject()
             .field("p", family.branching)
             .field("measure_ratio", family.measure_ratio)
             .field("symbol_ratio", family.symbol_ratio)
             .field("levels_probe", family.levels_probe)
             .raw("conv1", series(report.conv1))
             .raw("conv2", series(report.conv2))
             .str()
      << "\n";
  return kSuccess;
}

int cmd_verify(const RunConfig& config, const Input& in, std::ostream& out) {
  const WaveletBasis basis = build_basis(in.tree);
  if (config.check == "ortho") {
    const BasisReport report = verify_basis(in.tree, basis);
    const bool pass = report.passes(config.ortho_tol);
    out << JsonObject()
               .field("leaves", report.leaf_count)
               .field("wavelets", report.wavelet_count)
               .field("gram_deviation", report.gram_deviation)
               .field("projector_checks", report.projector_checks)
               .field("projector_failures", report.projector_failures)
               .field("max_projector_deviation", report.max_projector_deviation)
               .field("tol", config.ortho_tol)
               .field("pass", pass)
               .str()
        << "\n";
    return pass ? kSuccess : kVerificationFailed;
  }

  const Symbol& symbol = in.require_symbol();
  if (config.check == "eigen") {
    const EigenReport report = verify_eigen(in.tree, symbol, basis);
    const bool pass = report.passes(config.eigen_tol);
    out << JsonObject()
               .field("max_residual", report.max_residual)
               .field("worst_vertex", in.tree.name(report.worst_vertex))
               .field("constant_residual", report.constant_residual)
               .field("tol", config.eigen_tol)
               .field("pass", pass)
               .str()
        << "\n";
    return pass ? kSuccess : kVerificationFailed;
  }

  const Spectrum lambda = spectrum(in.tree, symbol);
  if (config.check == "kernel") {
    const KernelReport report = verify_kernel(in.tree, lambda, basis);
    const bool pass = report.passes(config.kernel_tol);
    out << JsonObject()
               .field("pairs", report.pairs)
               .field("max_deviation", report.max_deviation)
               .field("scale", report.scale)
               .field("tol", config.kernel_tol)
               .field("pass", pass)
               .str()
        << "\n";
    return pass ? kSuccess : kVerificationFailed;
  }
  if (config.check == "equation") {
    const double residual = check_equation(in.tree, symbol, lambda, basis, config.seed);
    const bool pass = residual <= config.equation_tol;
    out << JsonObject()
               .field("seed", static_cast<std::size_t>(config.seed))
               .field("residual", residual)
               .field("tol", config.equation_tol)
               .field("pass", pass)
               .str()
        << "\n";
    return pass ? kSuccess : kVerificationFailed;
  }
  // markov
  const MarkovReport report = verify_markov(in.tree, covariance_kernel(in.tree, lambda), config.trials, config.seed);
  const bool pass = report.passes();
  out << JsonObject()
             .field("trials", report.trials)
             .field("seed", static_cast<std::size_t>(config.seed))
             .field("max_ratio", report.max_ratio)
             .field("worst_trial", report.worst_trial)
             .field("uncovered", report.uncovered)
             .field("pass", pass)
             .str()
      << "\n";
  return pass ? kSuccess : kVerificationFailed;
}

int dispatch(const RunConfig& config, std::ostream& out) {
  if (config.command == "convergence") return cmd_convergence(config, out);
  const Input in = load_input(config);
  if (config.command == "validate") return cmd_validate(in, out);
  if (config.command == "spectrum") return cmd_spectrum(in, out);
  if (config.command == "wavelets") return cmd_wavelets(in, out);
  if (config.command == "kernel") return cmd_kernel(config, in, out);
  if (config.command == "sample") return cmd_sample(config, in, out);
  if (config.command == "mc-cov") return cmd_mc_cov(config, in, out);
  return cmd_verify(config, in, out);
}

void add_tree_input(CLI::App* sub, RunConfig& config) {
  sub->add_option("tree", config.input, "Tree-spec JSON file");
  sub->add_option("--gen", config.generate, "Homogeneous tree p:depth:measure instead of a file");
  sub->add_option("--t-root", config.t_root, "Generated trees: T at the root")->check(CLI::NonNegativeNumber);
  sub->add_option("--t-ratio", config.t_ratio, "Generated trees: T ratio per level down")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Gaussian random fields on ultrametric ball trees", "ultrafield"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", config.seed, "Random seed");
  app.add_option("--out", config.out, "Write the report to this file instead of standard output");
  app.add_flag("--quiet", config.quiet, "Suppress the pass/fail summary on standard error");

  auto* validate = app.add_subcommand("validate", "Check a tree-spec file and summarize it");
  add_tree_input(validate, config);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalue per interior vertex (CSV)");
  add_tree_input(spectrum_cmd, config);

  auto* wavelets = app.add_subcommand("wavelets", "Wavelet basis coefficients per child (CSV)");
  add_tree_input(wavelets, config);

  auto* kernel = app.add_subcommand("kernel", "Covariance kernel (CSV)");
  add_tree_input(kernel, config);
  kernel->add_option("--pairs", config.pairs, "all: every leaf pair; profile: one row per vertex")
      ->check(CLI::IsMember({"all", "profile"}));
  kernel->add_flag_callback("--profile", [&config] { config.pairs = "profile"; }, "Same as --pairs profile");

  auto* sample = app.add_subcommand("sample", "Field samples (CSV)");
  add_tree_input(sample, config);
  sample->add_option("--count", config.count, "Number of samples")->check(CLI::PositiveNumber);

  auto* mc = app.add_subcommand("mc-cov", "Monte Carlo covariance against the analytic kernel (JSON)");
  add_tree_input(mc, config);
  mc->add_option("--n", config.count, "Number of samples")->required()->check(CLI::PositiveNumber);
  mc->add_option("--tol-sigma", config.sigma_band, "Allowed deviation in standard errors")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run one verification (JSON, exit 1 on failure)");
  verify->fallthrough();
  verify->require_subcommand(1);
  auto* v_eigen = verify->add_subcommand("eigen", "Wavelets are eigenvectors with the closed-form spectrum");
  add_tree_input(v_eigen, config);
  v_eigen->add_option("--tol", config.eigen_tol, "Residual tolerance")->check(CLI::PositiveNumber);
  auto* v_kernel = verify->add_subcommand("kernel", "Closed-form kernel against the wavelet sum");
  add_tree_input(v_kernel, config);
  v_kernel->add_option("--tol", config.kernel_tol, "Relative tolerance")->check(CLI::PositiveNumber);
  auto* v_ortho = verify->add_subcommand("ortho", "Orthonormality, count, and projector identity");
  add_tree_input(v_ortho, config);
  v_ortho->add_option("--tol", config.ortho_tol, "Gram tolerance")->check(CLI::PositiveNumber);
  auto* v_markov = verify->add_subcommand("markov", "Zero covariance across disjoint balls");
  add_tree_input(v_markov, config);
  v_markov->add_option("--trials", config.trials, "Random instances")->check(CLI::PositiveNumber);
  auto* v_equation = verify->add_subcommand("equation", "Residual of T psi = phi");
  add_tree_input(v_equation, config);
  v_equation->add_option("--tol", config.equation_tol, "Residual tolerance")->check(CLI::PositiveNumber);

  auto* convergence = app.add_subcommand("convergence", "Series diagnostics for a geometric family (JSON)");
  convergence->add_option("--p", config.branching, "Branching")->check(CLI::Range(2, 1 << 20));
  convergence->add_option("--mu", config.measure_ratio, "Measure ratio per level up (> 1)");
  convergence->add_option("--q", config.symbol_ratio, "Symbol ratio per level up (>= 0)");
  convergence->add_option("--levels", config.levels, "Probe depth")->check(CLI::PositiveNumber);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  for (auto* sub : app.get_subcommands()) {
    config.command = sub->get_name();
    if (sub == verify) config.check = verify->get_subcommands().front()->get_name();
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!config.out.empty()) {
    file.open(config.out);
    if (!file) {
      err << "error: cannot write '" << config.out << "'\n";
      return kInputError;
    }
    sink = &file;
  }

  try {
    const int code = dispatch(config, *sink);
    if (!config.quiet && (config.command == "verify" || config.command == "mc-cov")) {
      err << (code == kSuccess ? "pass" : "FAIL") << "\n";
    }
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace ultrafield::cli
