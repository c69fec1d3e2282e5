// dppla: command-line front end for sampling, scores, benchmarks and the
// verification suites.
//
// Exit codes: 0 success, 1 usage error, 2 validation error, 3 verification failure.

#include "dppla/bench.hpp"
#include "dppla/io.hpp"
#include "dppla/verify.hpp"
#include "report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace dppla;
using cli::Report;
using cli::json;

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;

/// Bad input that the sample command reports as a usage error.
struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string input;
  std::string kernel;
  Index n = 100;
  Index d = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  std::vector<Index> k;
  Index r = 1;
  double lambda = 1.0;
  double eps = 0.5;
  double sigma = 1.0;
  double coherence_factor = 1.0;
  std::size_t reps = 100;
  std::size_t steps = 0;
  std::string out;
  std::string format = "csv";
  std::string suite = "all";
  bool pmf = false;
};

void emit(const Report& report, const RunConfig& cfg) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) throw ValidationError("cannot write '" + cfg.out + "'");
    out = &file;
  }
  if (cfg.format == "json")
    cli::write_json(*out, report);
  else
    cli::write_csv(*out, report);
}

std::string subset_text(const SubsetSample& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ";" : "") + std::to_string(s.indices()[i]);
  return out;
}

void record_common(Report& r, const RunConfig& cfg) {
  r.config["seed"] = cfg.seed;
  if (!cfg.input.empty()) r.config["input"] = cfg.input;
  if (!cfg.kernel.empty()) r.config["kernel"] = cfg.kernel;
}

/// Data matrix from --input, or a synthetic Gaussian one.
Matrix load_data(const RunConfig& cfg, Report& r) {
  if (!cfg.input.empty()) return read_csv_matrix_file(cfg.input);
  if (cfg.n < 1 || cfg.d < 1) throw ValidationError("--n and --d must be positive");
  r.config["n"] = cfg.n;
  r.config["d"] = cfg.d;
  r.config["coherence_factor"] = cfg.coherence_factor;
  Rng rng(derive_seed(cfg.seed, 0xda7a));
  Matrix x = gaussian_matrix(cfg.n, cfg.d, rng);
  x.row(0) *= cfg.coherence_factor;
  return x;
}

// ---------------------------------------------------------------------------

int cmd_scores(const RunConfig& cfg) {
  Report r;
  r.command = "scores";
  record_common(r, cfg);
  const Matrix x = load_data(cfg, r);
  r.config["lambda"] = cfg.lambda;

  const Vector lev = leverage_exact(x).values;
  const Vector ridge = ridge_leverage_exact(x, cfg.lambda).values;
  std::optional<Vector> approx;
  if (x.rows() >= x.cols()) approx = leverage_approx(x, cfg.seed).values;

  r.summary["n"] = x.rows();
  r.summary["d"] = x.cols();
  r.summary["rank"] = numerical_rank(x);
  r.summary["coherence"] = coherence(x);
  r.summary["effective_dimension"] = ridge.sum();
  r.columns = {"index", "leverage", "leverage_approx", "ridge_leverage"};
  for (Index i = 0; i < x.rows(); ++i)
    r.add_row({std::int64_t{i}, lev(i), approx ? (*approx)(i) : std::numeric_limits<double>::quiet_NaN(), ridge(i)});
  emit(r, cfg);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_sample(const RunConfig& cfg) {
  Report r;
  r.command = "sample";
  record_common(r, cfg);
  const std::string method = cfg.methods.empty() ? "dpp" : cfg.methods.front();
  if (cfg.methods.size() > 1) throw ValidationError("sample takes a single --method");

  Matrix l_matrix;
  std::optional<Matrix> data;
  if (!cfg.kernel.empty()) {
    l_matrix = read_csv_matrix_file(cfg.kernel);
  } else {
    data = load_data(cfg, r);
    l_matrix = *data * data->transpose();
  }
  const LEnsembleKernel l = [&] {
    try {
      return LEnsembleKernel(l_matrix);
    } catch (const Error& e) {
      throw UsageError(std::string("invalid kernel: ") + e.what());
    }
  }();
  const Index n = l.n();
  const Index k = cfg.k.empty() ? l.rank() : cfg.k.front();
  r.config["method"] = method;

  const auto projection_basis = [&] {
    if (data) return ProjectionBasis::from_column_span(*data);
    const auto& e = l.eigen();
    return ProjectionBasis(Matrix(e.eigenvectors.leftCols(l.rank())));
  };

  if (cfg.pmf) {
    const bool sized = method == "kdpp" || method == "mcmc";
    const PmfTable pmf = method == "dpp" ? pmf_lensemble(l) : pmf_kdpp(l, sized ? k : l.rank());
    if (sized) r.config["k"] = k;
    r.columns = {"subset", "size", "probability"};
    for (std::uint64_t m = 0; m < pmf.size(); ++m) {
      if (pmf[m] == 0.0 && method != "dpp") continue;
      const auto s = SubsetSample::from_mask(m, n);
      r.add_row({subset_text(s), static_cast<std::int64_t>(s.size()), pmf[m]});
    }
    r.summary["expected_size"] = pmf.expected_size();
    emit(r, cfg);
    return 0;
  }

  r.config["reps"] = cfg.reps;
  std::function<SubsetSample(Rng&)> draw;
  std::optional<IntermediateSampler> intermediate;
  if (method == "dpp") {
    draw = [&](Rng& g) { return sample_lensemble(l, g); };
  } else if (method == "kdpp") {
    r.config["k"] = k;
    draw = [&](Rng& g) { return sample_kdpp(l, k, g); };
  } else if (method == "projection") {
    const auto basis = projection_basis();
    draw = [basis](Rng& g) { return sample_projection_dpp(basis, g); };
  } else if (method == "intermediate") {
    intermediate.emplace(projection_basis());
    r.config["oversample_size"] = intermediate->oversample_size();
    draw = [&](Rng& g) { return intermediate->sample(g); };
  } else if (method == "mcmc") {
    const std::size_t steps = cfg.steps ? cfg.steps : default_step_budget(n, k, std::min(cfg.eps, 0.5));
    r.config["k"] = k;
    r.config["steps"] = steps;
    draw = [&l, k, steps](Rng& g) { return sample_kdpp_mcmc(l, k, steps, g); };
  } else {
    throw ValidationError("unknown method '" + method + "' (expected dpp, kdpp, projection, intermediate or mcmc)");
  }

  r.columns = {"rep", "seed", "size", "subset"};
  double total = 0.0;
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const std::uint64_t seed = derive_seed(cfg.seed, rep);
    Rng rng(seed);
    const SubsetSample s = draw(rng);
    total += static_cast<double>(s.size());
    r.add_row({static_cast<std::int64_t>(rep), std::to_string(seed), static_cast<std::int64_t>(s.size()), subset_text(s)});
  }
  r.summary["mean_size"] = cfg.reps ? total / static_cast<double>(cfg.reps) : 0.0;
  if (intermediate) r.summary["acceptance_rate"] = intermediate->acceptance_rate();
  emit(r, cfg);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_lsq_bench(const RunConfig& cfg) {
  Report r;
  r.command = "lsq-bench";
  record_common(r, cfg);
  std::optional<RegressionProblem> prob;
  std::optional<Vector> w_true;
  if (!cfg.input.empty()) {
    const Matrix xy = read_csv_matrix_file(cfg.input);
    if (xy.cols() < 2) throw ValidationError("lsq-bench input needs at least two columns (X then y)");
    prob.emplace(Matrix(xy.leftCols(xy.cols() - 1)), Vector(xy.col(xy.cols() - 1)));
  } else {
    r.config["n"] = cfg.n;
    r.config["d"] = cfg.d;
    r.config["sigma"] = cfg.sigma;
    r.config["coherence_factor"] = cfg.coherence_factor;
    Rng rng(derive_seed(cfg.seed, 0xda7a));
    auto syn = synthetic_regression(cfg.n, cfg.d, cfg.sigma, cfg.coherence_factor, rng);
    prob.emplace(std::move(syn.problem));
    w_true = std::move(syn.w_true);
  }

  LsqBenchConfig bc;
  if (!cfg.methods.empty()) {
    bc.methods.clear();
    for (const auto& m : cfg.methods) bc.methods.push_back(parse_lsq_method(m));
  }
  bc.sample_sizes = cfg.k;
  if (bc.sample_sizes.empty()) bc.sample_sizes = {2 * prob->d(), iid_sample_size(prob->d(), cfg.eps)};
  bc.reps = cfg.reps;
  bc.eps = cfg.eps;
  bc.seed = cfg.seed;

  json methods = json::array();
  for (auto m : bc.methods) methods.push_back(to_string(m));
  r.config["methods"] = methods;
  r.config["k"] = bc.sample_sizes;
  r.config["reps"] = bc.reps;
  r.config["eps"] = bc.eps;

  const Vector w_star = lstsq(prob->x, prob->y);
  r.summary["n"] = prob->n();
  r.summary["d"] = prob->d();
  r.summary["optimal_loss"] = loss(*prob, w_star);
  r.summary["coherence"] = coherence(prob->x);
  r.summary["mse_reference"] = w_true ? "planted" : "least_squares";

  r.columns = {"method",   "k",         "reps",          "mean_loss_ratio", "median_loss_ratio", "frac_within_1_plus_eps",
               "bias_norm", "bias_mc_sigma", "mse", "rank_deficient"};
  for (const auto& row : lsq_bench(*prob, bc, w_true))
    r.add_row({to_string(row.method), std::int64_t{row.k}, static_cast<std::int64_t>(row.reps), row.mean_loss_ratio,
               row.median_loss_ratio, row.frac_within, row.bias_norm, row.bias_mc_sigma, row.mse,
               static_cast<std::int64_t>(row.rank_deficient)});
  emit(r, cfg);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_lowrank_bench(const RunConfig& cfg) {
  Report r;
  r.command = "lowrank-bench";
  record_common(r, cfg);
  const LowrankTarget target =
      cfg.kernel.empty() ? LowrankTarget::data(load_data(cfg, r)) : LowrankTarget::kernel(read_csv_matrix_file(cfg.kernel));

  LowrankBenchConfig bc;
  if (!cfg.methods.empty()) {
    bc.methods.clear();
    for (const auto& m : cfg.methods) bc.methods.push_back(parse_lowrank_method(m));
  }
  bc.r = cfg.r;
  bc.lambda = cfg.lambda;
  bc.reps = cfg.reps;
  bc.seed = cfg.seed;
  bc.sample_sizes = cfg.k.empty() ? std::vector<Index>{kdpp_size_for(cfg.r, cfg.eps)} : cfg.k;

  json methods = json::array();
  for (auto m : bc.methods) methods.push_back(to_string(m));
  r.config["target"] = target.is_kernel() ? "nystrom" : "rows";
  r.config["methods"] = methods;
  r.config["k"] = bc.sample_sizes;
  r.config["r"] = bc.r;
  r.config["eps"] = cfg.eps;
  r.config["lambda"] = bc.lambda;
  r.config["reps"] = bc.reps;
  r.summary["n"] = target.n();
  r.summary["norm"] = target.is_kernel() ? "nuclear" : "frobenius_squared";
  r.summary["kdpp_size_for_eps"] = kdpp_size_for(cfg.r, cfg.eps);
  r.summary["bound_factor"] = 1.0 + cfg.eps;

  r.columns = {"method", "k", "reps", "mean_error", "error_mc_sigma", "baseline", "ratio", "mean_subset_size", "note"};
  for (const auto& row : lowrank_bench(target, bc))
    r.add_row({to_string(row.method), std::int64_t{row.k}, static_cast<std::int64_t>(row.reps), row.mean_error,
               row.error_mc_sigma, row.baseline, row.ratio, row.mean_subset_size, row.note});
  emit(r, cfg);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg) {
  Report r;
  r.command = "verify";
  record_common(r, cfg);
  std::vector<CheckResult> checks;
  if (!cfg.kernel.empty()) {
    checks = check_kernel(read_csv_matrix_file(cfg.kernel));
  } else {
    r.config["suite"] = cfg.suite;
    checks = run_suite(cfg.suite, cfg.seed);
  }
  std::size_t passed = 0;
  r.columns = {"check", "passed", "observed", "relation", "expected", "detail"};
  for (const auto& c : checks) {
    passed += c.passed ? 1 : 0;
    r.add_row({c.name, c.passed, c.observed, c.relation, c.expected, c.detail});
  }
  r.summary["checks"] = checks.size();
  r.summary["passed"] = passed;
  emit(r, cfg);
  for (const auto& c : checks)
    if (!c.passed)
      std::cerr << "FAILED: " << c.name << ": observed " << c.observed << ", expected " << c.relation << ' '
                << c.expected << '\n';
  std::cerr << passed << '/' << checks.size() << " checks passed\n";
  return passed == checks.size() ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Determinantal point processes for randomized linear algebra"};
  app.set_version_flag("--version", std::string(dppla::kVersion));
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_output = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Base random seed")->capture_default_str();
    sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  const auto add_data = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Data matrix X as headerless CSV")->check(CLI::ExistingFile);
    sub->add_option("--n", cfg.n, "Rows of the synthetic Gaussian matrix")->capture_default_str();
    sub->add_option("--d", cfg.d, "Columns of the synthetic Gaussian matrix")->capture_default_str();
    sub->add_option("--coherence-factor", cfg.coherence_factor, "Scale applied to row 0 of synthetic data")
        ->capture_default_str();
  };

  auto* scores = app.add_subcommand("scores", "Exact and approximate leverage scores, ridge scores, coherence");
  add_data(scores);
  add_output(scores);
  scores->add_option("--lambda", cfg.lambda, "Ridge parameter")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Draw DPP samples or print the enumeration pmf");
  add_data(sample);
  add_output(sample);
  sample->add_option("--kernel", cfg.kernel, "L-ensemble kernel as headerless CSV")->check(CLI::ExistingFile);
  sample->add_option("--method", cfg.methods, "dpp | kdpp | projection | intermediate | mcmc")
      ->check(CLI::IsMember({"dpp", "kdpp", "projection", "intermediate", "mcmc"}));
  sample->add_option("--k", cfg.k, "Subset size for kdpp and mcmc (default: rank)");
  sample->add_option("--reps", cfg.reps, "Number of samples")->capture_default_str();
  sample->add_option("--steps", cfg.steps, "Swap-chain steps (default: step budget for --eps)");
  sample->add_option("--eps", cfg.eps, "Target total variation for the default step budget")->capture_default_str();
  sample->add_flag("--pmf", cfg.pmf, "Print the exact pmf table instead of sampling (n <= 20)");
  sample->get_option("--kernel")->excludes(sample->get_option("--input"));

  auto* lsq = app.add_subcommand("lsq-bench", "Least-squares sketch benchmark");
  lsq->add_option("--input", cfg.input, "CSV with the columns of X followed by y")->check(CLI::ExistingFile);
  lsq->add_option("--n", cfg.n, "Rows of the synthetic problem")->capture_default_str();
  lsq->add_option("--d", cfg.d, "Columns of the synthetic problem")->capture_default_str();
  lsq->add_option("--sigma", cfg.sigma, "Noise standard deviation")->capture_default_str();
  lsq->add_option("--coherence-factor", cfg.coherence_factor, "Scale applied to row 0")->capture_default_str();
  lsq->add_option("--method", cfg.methods, "uniform | squared_norm | leverage | projection_dpp (repeatable)")
      ->check(CLI::IsMember({"uniform", "squared_norm", "leverage", "projection_dpp"}));
  lsq->add_option("--k", cfg.k, "Sample sizes for the i.i.d. methods");
  lsq->add_option("--reps", cfg.reps, "Repetitions per cell")->capture_default_str();
  lsq->add_option("--eps", cfg.eps, "Accuracy level for frac_within and the default k")->capture_default_str();
  add_output(lsq);

  auto* lowrank = app.add_subcommand("lowrank-bench", "Subset selection and Nystrom benchmark");
  add_data(lowrank);
  add_output(lowrank);
  lowrank->add_option("--kernel", cfg.kernel, "PSD kernel for the Nystrom variant")
      ->check(CLI::ExistingFile)
      ->excludes(lowrank->get_option("--input"));
  lowrank->add_option("--method", cfg.methods, "uniform | ridge_leverage | kdpp (repeatable)")
      ->check(CLI::IsMember({"uniform", "ridge_leverage", "kdpp"}));
  lowrank->add_option("--k", cfg.k, "Subset sizes (default: ceil(r + r/eps - 1))");
  lowrank->add_option("--r", cfg.r, "Target rank")->capture_default_str();
  lowrank->add_option("--eps", cfg.eps, "Accuracy level")->capture_default_str();
  lowrank->add_option("--lambda", cfg.lambda, "Ridge parameter for ridge_leverage")->capture_default_str();
  lowrank->add_option("--reps", cfg.reps, "Repetitions per cell")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Run the enumeration oracle suites");
  add_output(verify);
  verify->add_option("--suite", cfg.suite, "Suite to run")
      ->check(CLI::IsMember(dppla::suite_names()))
      ->capture_default_str();
  verify->add_option("--kernel", cfg.kernel, "Check the identities on this kernel instead")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*scores) return cmd_scores(cfg);
    if (*sample) return cmd_sample(cfg);
    if (*lsq) return cmd_lsq_bench(cfg);
    if (*lowrank) return cmd_lowrank_bench(cfg);
    if (*verify) return cmd_verify(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dppla::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
