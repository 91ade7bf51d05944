#include "mhmgt/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mhmgt/cli/config.hpp"
#include "mhmgt/cli/data.hpp"
#include "mhmgt/cli/output.hpp"
#include "mhmgt/diagnostics.hpp"
#include "mhmgt/errors.hpp"
#include "mhmgt/gibbs.hpp"
#include "mhmgt/hb.hpp"
#include "mhmgt/mgt.hpp"
#include "mhmgt/slice.hpp"
#include "mhmgt/theorem.hpp"

namespace mhmgt::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Everything a verb needs between reading its settings and writing files.
struct Session {
  Config cfg;
  std::uint64_t seed = 0;
  bool quick = false;
  fs::path out;
  fs::path config_dir;
  std::vector<fs::path> data_files;
  Provenance provenance;
  CommandOutcome outcome;

  fs::path file(const std::string& name) {
    outcome.files.push_back(out / name);
    return out / name;
  }

  fs::path data_path(const std::string& key) {
    fs::path p = cfg.get_string(key);
    if (p.is_relative()) p = config_dir / p;
    if (!fs::exists(p)) cfg.reject(key, "names a missing file: " + p.string());
    data_files.push_back(p);
    return p;
  }
};

Session open_session(const CommonOptions& options, const std::string& command) {
  Session s;
  if (options.config) {
    s.cfg = Config::load(*options.config);
    s.config_dir = options.config->parent_path();
  }
  if (options.seed) s.cfg.set("seed", std::to_string(*options.seed));
  if (!s.cfg.has("seed")) {
    throw ConfigError(s.cfg.source(), 0,
                      "a seed is required: set 'seed' in the config or pass --seed");
  }
  s.seed = s.cfg.get_u64("seed");
  if (options.quick) s.cfg.set("quick", "true");
  s.quick = s.cfg.get_bool("quick", false);
  s.out = options.out;
  s.provenance.command = command;
  return s;
}

// Freezes the settings: rejects unknown keys and fixes the provenance.
void seal(Session& s) {
  s.cfg.reject_unused();
  s.provenance.seed = s.seed;
  s.provenance.config = s.cfg.resolved();
  s.provenance.input_sha1 = input_hash(s.provenance.config, s.data_files);
  fs::create_directories(s.out);
}

json number(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json cost_json(const EvalCost& c) {
  return {{"n_value", c.n_value}, {"n_gradient", c.n_gradient}, {"n_hessian", c.n_hessian}};
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

std::vector<std::string> coordinate_names(const std::string& lead, Index dim) {
  std::vector<std::string> h{lead};
  for (Index i = 0; i < dim; ++i) h.push_back("x" + std::to_string(i + 1));
  return h;
}

std::span<const double> column_span(const Matrix& m, Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

// ESS per dimension, or nothing when the chain is too short to estimate.
std::optional<Vector> maybe_ess(const Matrix& samples) {
  if (samples.rows() < 10) return std::nullopt;
  return ess_per_dim(samples);
}

std::size_t default_count(const Session& s, std::size_t full, std::size_t quick) {
  return s.quick ? quick : full;
}

// ---------------------------------------------------------------------------

struct ChainTarget {
  TargetPtr target;
  std::shared_ptr<const UnivariateTargetWithThird> univariate;
};

ChainTarget chain_target(Session& s) {
  auto& c = s.cfg;
  const std::string name = c.get_string("target", std::string("poisson"));
  if (name == "poisson") {
    const auto raw = c.get_ints("counts", std::vector<std::int64_t>{2});
    std::vector<int> counts;
    for (auto v : raw) {
      if (v < 0) c.reject("counts", "must be non-negative");
      counts.push_back(static_cast<int>(v));
    }
    auto t = poisson_lograte_target(counts);
    return {t, t};
  }
  if (name == "gaussian") {
    const auto mean_list = c.get_doubles("mean", std::vector<double>{0.0});
    const Index dim = static_cast<Index>(mean_list.size());
    const Vector mean = Eigen::Map<const Vector>(mean_list.data(), dim);
    Matrix precision = Matrix::Identity(dim, dim);
    if (c.has("precision")) {
      const auto p = c.get_doubles("precision");
      if (static_cast<Index>(p.size()) != dim * dim) {
        c.reject("precision", "needs dim*dim row-major entries");
      }
      precision = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(p.data(), dim, dim);
    }
    try {
      return {gaussian_prior(mean, SymMatrix(precision)), nullptr};
    } catch (const NotPositiveDefinite& e) {
      c.reject("precision", std::string("is not positive definite: ") + e.what());
    }
  }
  if (name == "logistic") {
    LogisticData data;
    if (c.has("data")) {
      data = read_logistic_csv(s.data_path("data"));
    } else {
      const auto n = c.get_int("n_obs", 1000);
      const auto k = c.get_int("n_cov", 10);
      const double sd = c.get_double("coef_sd", 0.5);
      Rng rng = make_rng(s.seed, 0);
      data = simulate_logistic(n, k, sd, rng);
    }
    TargetPtr t = logistic_target(data.x, data.y);
    const double prior = c.get_double("prior_precision", 0.0);
    if (prior < 0) c.reject("prior_precision", "must be >= 0");
    if (prior > 0) {
      const Index k = data.x.cols();
      t = additive_target({t, gaussian_prior(Vector::Zero(k),
                                             SymMatrix::diagonal(Vector::Constant(k, prior)))});
    }
    return {t, nullptr};
  }
  c.reject("target", "must be poisson, gaussian or logistic");
}

}  // namespace

CommandOutcome cmd_chain(const CommonOptions& options) {
  Session s = open_session(options, "chain");
  auto& c = s.cfg;
  const ChainTarget ct = chain_target(s);
  const DifferentiableTarget& target = *ct.target;
  const Index dim = target.dim();

  const std::string sampler = c.get_string("sampler", std::string("mgt"));
  if (sampler != "mgt" && sampler != "slice") c.reject("sampler", "must be mgt or slice");
  auto x0_list = c.get_doubles("x0", std::vector<double>(1, 0.0));
  if (x0_list.size() == 1 && dim > 1) x0_list.assign(dim, x0_list.front());
  if (static_cast<Index>(x0_list.size()) != dim) {
    c.reject("x0", "needs one value or " + std::to_string(dim));
  }
  const Vector x0 = Eigen::Map<const Vector>(x0_list.data(), dim);
  const std::size_t n_burnin = c.get_u64("n_burnin", 0);
  const std::size_t n_samples = c.get_u64("n_samples", default_count(s, 1000, 200));

  MgtConfig mgt_cfg;
  SliceConfig slice_cfg;
  Index block_size = dim;
  if (sampler == "mgt") {
    mgt_cfg = MgtConfig{c.get_u64("n_newton", n_burnin / 2), n_burnin, n_samples, s.seed,
                        c.get_bool("cache", true)};
    block_size = static_cast<Index>(c.get_int("block_size", dim));
    if (block_size < 1) c.reject("block_size", "must be >= 1");
    try {
      mgt_cfg.validate();
    } catch (const std::invalid_argument& e) {
      c.reject("n_newton", e.what());
    }
  } else {
    slice_cfg = SliceConfig{c.get_double("slice_width", 1.0),
                            static_cast<int>(c.get_int("slice_max_stepout", 10)), s.seed};
    try {
      slice_cfg.validate();
    } catch (const std::invalid_argument& e) {
      c.reject("slice_width", e.what());
    }
  }
  const std::size_t calibration_reps = c.get_u64("calibration_reps", 200);
  if (calibration_reps < 100) c.reject("calibration_reps", "must be >= 100");
  seal(s);

  Rng rng = make_rng(s.seed, 1);
  ChainTrace trace;
  if (sampler == "slice") {
    trace = slice_gibbs_chain(target, x0, n_burnin, n_samples, slice_cfg, rng);
  } else if (block_size < dim) {
    trace = run_block_chain(target, BlockPartition::contiguous(dim, block_size), x0, mgt_cfg, rng);
  } else {
    trace = run_chain(target, x0, mgt_cfg, rng);
  }

  {
    CsvWriter out(s.file("samples.csv"), "mhmgt.samples", s.provenance, coordinate_names("step", dim));
    for (Index i = 0; i < trace.size(); ++i) {
      std::vector<std::string> row{std::to_string(i + 1)};
      for (Index d = 0; d < dim; ++d) row.push_back(format_real(trace.samples(i, d)));
      out.row(row);
    }
  }
  {
    CsvWriter out(s.file("steps.csv"), "mhmgt.steps", s.provenance,
                  {"step", "accepted", "log_ratio", "n_value", "n_gradient", "n_hessian"});
    for (Index i = 0; i < trace.size(); ++i) {
      const auto& cost = trace.cumulative_cost[i];
      out.row({std::to_string(i + 1), trace.accepted[i] ? "1" : "0",
               trace.log_ratio.empty() ? "NA" : format_real(trace.log_ratio[i]),
               std::to_string(cost.n_value), std::to_string(cost.n_gradient),
               std::to_string(cost.n_hessian)});
    }
  }
  {
    std::vector<std::string> header = coordinate_names("iteration", dim);
    header.insert(header.begin() + 1, "phase");
    CsvWriter out(s.file("burnin.csv"), "mhmgt.burnin", s.provenance, header);
    const auto write = [&](std::size_t it, const std::string& phase, const Vector& x) {
      std::vector<std::string> row{std::to_string(it), phase};
      for (Index d = 0; d < dim; ++d) row.push_back(format_real(x(d)));
      out.row(row);
    };
    write(0, "start", x0);
    for (Index k = 0; k < trace.burnin_path.rows(); ++k) {
      const std::string phase = sampler == "slice" ? "slice"
                                : static_cast<std::size_t>(k) < mgt_cfg.n_newton ? "newton"
                                                                                 : "mh";
      write(static_cast<std::size_t>(k) + 1, phase, trace.burnin_path.row(k).transpose());
    }
  }

  const auto ess = maybe_ess(trace.samples);
  json body;
  body["sampler"] = trace.meta.sampler;
  body["dim"] = dim;
  body["n_samples"] = trace.size();
  body["acceptance_rate"] = trace.size() > 0 ? number(trace.acceptance_rate()) : json(nullptr);
  body["hessian_failures"] = trace.hessian_failures;
  body["posterior_mean"] = trace.size() > 0 ? vector_json(trace.samples.colwise().mean().transpose())
                                            : json(nullptr);
  body["ess"] = ess ? vector_json(*ess) : json(nullptr);
  body["mean_ess"] = ess ? number(ess->mean()) : json(nullptr);
  body["effective_sampling_rate"] = ess ? number(ess->mean() / trace.size()) : json(nullptr);
  body["counters"] = {{"burnin", cost_json(trace.burnin_cost)},
                      {"sampling", cost_json(trace.sampling_cost)}};
  if (ct.univariate) {
    try {
      const double mode = find_mode(*ct.univariate);
      body["mixing"] = {{"mode", mode}, {"eta0", mixing_index(*ct.univariate)}};
    } catch (const ModeNotFound& e) {
      body["mixing"] = {{"mode", nullptr}, {"eta0", nullptr}, {"error", e.what()}};
    }
  }
  write_json(s.file("summary.json"), s.provenance, body);

  Rng calib_rng = make_rng(s.seed, 2);
  const CalibrationProfile calib = calibrate(target, x0, calibration_reps, calib_rng);
  const FeeReport f = fee(trace, calib);
  json timing;
  timing["wall_time_seconds"] = trace.wall_time;
  timing["calibration"] = {{"seconds_per_value_eval", calib.seconds_per_value_eval},
                           {"n_reps", calib.n_reps}};
  timing["fee_total"] = f.total;
  timing["fee_per_nominal_sample"] = trace.size() > 0 ? number(f.per_sample) : json(nullptr);
  timing["fee_per_effective_sample"] =
      ess ? number(EfficiencyReport::make(f.per_sample, ess->mean() / trace.size())
                       .fee_per_effective)
          : json(nullptr);
  write_json(s.file("chain.timing.json"), s.provenance, timing);

  std::ostringstream msg;
  msg << trace.meta.sampler << ": " << trace.size() << " samples";
  if (trace.size() > 0) msg << ", acceptance " << trace.acceptance_rate();
  s.outcome.summary = msg.str();
  return s.outcome;
}

// ---------------------------------------------------------------------------

namespace {

struct RunMeasure {
  double sampling_rate = 0.0;  // mean ESS / n
  EfficiencyReport report;
  EvalCost counters;
  double acceptance = 0.0;
  double calibration = 0.0;
};

RunMeasure measure(const ChainTrace& trace, const CalibrationProfile& calib) {
  RunMeasure m;
  m.report = efficiency(trace, calib);
  m.sampling_rate = m.report.effective_sampling_rate;
  m.counters = trace.sampling_cost;
  m.acceptance = trace.acceptance_rate();
  m.calibration = calib.seconds_per_value_eval;
  return m;
}

}  // namespace

CommandOutcome cmd_benchmark(const CommonOptions& options) {
  Session s = open_session(options, "benchmark");
  auto& c = s.cfg;
  const Index n_obs = c.get_int("n_obs", 1000);
  const Index n_cov = c.get_int("n_cov", 10);
  const double coef_sd = c.get_double("coef_sd", 0.5);
  const std::size_t runs = c.get_u64("runs", default_count(s, 10, 1));
  const std::size_t n_samples = c.get_u64("n_samples", default_count(s, 2000, 1000));
  const std::size_t n_burnin = c.get_u64("n_burnin", 200);
  const std::size_t n_newton = c.get_u64("n_newton", 10);
  const Index block_size = c.get_int("block_size", n_cov);
  const auto widths = c.get_doubles("slice_widths", std::vector<double>{0.1, 0.2, 0.5, 1.0, 2.0});
  const std::size_t tuning_samples = c.get_u64("tuning_samples", default_count(s, 500, 200));
  const std::size_t calibration_reps = c.get_u64("calibration_reps", 200);
  if (n_obs < 1 || n_cov < 1) c.reject(n_obs < 1 ? "n_obs" : "n_cov", "must be >= 1");
  if (runs < 1) c.reject("runs", "must be >= 1");
  if (n_samples < 10) c.reject("n_samples", "must be >= 10 for ESS");
  if (tuning_samples < 10) c.reject("tuning_samples", "must be >= 10 for ESS");
  if (block_size < 1) c.reject("block_size", "must be >= 1");
  if (widths.empty()) c.reject("slice_widths", "must list at least one width");
  for (double w : widths) {
    if (!(w > 0)) c.reject("slice_widths", "must be positive");
  }
  if (calibration_reps < 100) c.reject("calibration_reps", "must be >= 100");
  if (n_newton > n_burnin) c.reject("n_newton", "must not exceed n_burnin");
  seal(s);

  // Slice width tuning on its own simulated dataset, scored by value
  // evaluations per effective sample so the choice is reproducible.
  json sweep = json::array();
  double best_width = widths.front();
  double best_score = std::numeric_limits<double>::infinity();
  {
    Rng data_rng = make_rng(s.seed, 1000);
    const LogisticData data = simulate_logistic(n_obs, n_cov, coef_sd, data_rng);
    const auto target = logistic_target(data.x, data.y);
    for (std::size_t w = 0; w < widths.size(); ++w) {
      Rng rng = make_rng(s.seed, 1001 + w);
      const auto trace = slice_gibbs_chain(*target, Vector::Zero(n_cov), n_burnin, tuning_samples,
                                           SliceConfig{widths[w], 10, s.seed}, rng);
      const double rate = ess_per_dim(trace.samples).mean() / static_cast<double>(trace.size());
      const double per_sweep =
          static_cast<double>(trace.sampling_cost.n_value) / static_cast<double>(trace.size());
      const double score = per_sweep / rate;
      sweep.push_back({{"width", widths[w]},
                       {"value_evals_per_sweep", per_sweep},
                       {"effective_sampling_rate", rate},
                       {"value_evals_per_effective_sample", score}});
      if (score < best_score) {
        best_score = score;
        best_width = widths[w];
      }
    }
  }

  std::vector<RunMeasure> mgt_runs, slice_runs;
  json per_run = json::array();
  json per_run_timing = json::array();
  const auto partition = BlockPartition::contiguous(n_cov, std::min(block_size, n_cov));
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t base = child_seed(s.seed, 100 + r);
    Rng data_rng = make_rng(base, 0);
    const LogisticData data = simulate_logistic(n_obs, n_cov, coef_sd, data_rng);
    const auto target = logistic_target(data.x, data.y);
    Rng calib_rng = make_rng(base, 3);
    const auto calib = calibrate(*target, Vector::Zero(n_cov), calibration_reps, calib_rng);

    Rng mgt_rng = make_rng(base, 1);
    const MgtConfig mcfg{n_newton, n_burnin, n_samples, base, true};
    const ChainTrace mgt = partition.size() == 1
                               ? run_chain(*target, Vector::Zero(n_cov), mcfg, mgt_rng)
                               : run_block_chain(*target, partition, Vector::Zero(n_cov), mcfg, mgt_rng);
    Rng slice_rng = make_rng(base, 2);
    const ChainTrace slice = slice_gibbs_chain(*target, Vector::Zero(n_cov), n_burnin, n_samples,
                                               SliceConfig{best_width, 10, base}, slice_rng);
    mgt_runs.push_back(measure(mgt, calib));
    slice_runs.push_back(measure(slice, calib));

    per_run.push_back({{"run", r},
                       {"mh_mgt",
                        {{"acceptance_rate", mgt.acceptance_rate()},
                         {"effective_sampling_rate", mgt_runs.back().sampling_rate},
                         {"hessian_failures", mgt.hessian_failures},
                         {"counters", cost_json(mgt.sampling_cost)}}},
                       {"slice",
                        {{"effective_sampling_rate", slice_runs.back().sampling_rate},
                         {"counters", cost_json(slice.sampling_cost)}}}});
    per_run_timing.push_back({{"run", r},
                              {"seconds_per_value_eval", calib.seconds_per_value_eval},
                              {"mh_mgt",
                               {{"wall_time_seconds", mgt.wall_time},
                                {"fee_per_nominal_sample", mgt_runs.back().report.fee_per_nominal},
                                {"fee_per_effective_sample", mgt_runs.back().report.fee_per_effective}}},
                              {"slice",
                               {{"wall_time_seconds", slice.wall_time},
                                {"fee_per_nominal_sample", slice_runs.back().report.fee_per_nominal},
                                {"fee_per_effective_sample", slice_runs.back().report.fee_per_effective}}}});
  }

  // Averages of the first two rows; the third row follows from them.
  const auto average = [](const std::vector<RunMeasure>& ms) {
    double nominal = 0, rate = 0;
    for (const auto& m : ms) {
      nominal += m.report.fee_per_nominal;
      rate += m.sampling_rate;
    }
    return EfficiencyReport::make(nominal / ms.size(), rate / ms.size());
  };
  const EfficiencyReport mgt_avg = average(mgt_runs);
  const EfficiencyReport slice_avg = average(slice_runs);

  json body;
  body["design"] = {{"n_obs", n_obs}, {"n_cov", n_cov}, {"runs", runs}, {"n_samples", n_samples},
                    {"mh_mgt_blocks", partition.size()}};
  body["slice_tuning"] = {{"chosen_width", best_width}, {"sweep", sweep}};
  body["effective_sampling_rate"] = {{"mh_mgt", mgt_avg.effective_sampling_rate},
                                     {"slice", slice_avg.effective_sampling_rate}};
  body["runs"] = per_run;
  write_json(s.file("benchmark.json"), s.provenance, body);

  {
    CsvWriter out(s.file("efficiency.timing.csv"), "mhmgt.efficiency", s.provenance,
                  {"metric", "mh_mgt", "slice"});
    out.row({"fee_per_nominal_sample", format_real(mgt_avg.fee_per_nominal),
             format_real(slice_avg.fee_per_nominal)});
    out.row({"effective_sampling_rate", format_real(mgt_avg.effective_sampling_rate),
             format_real(slice_avg.effective_sampling_rate)});
    out.row({"fee_per_effective_sample", format_real(mgt_avg.fee_per_effective),
             format_real(slice_avg.fee_per_effective)});
  }
  const double speedup = slice_avg.fee_per_effective / mgt_avg.fee_per_effective;
  json timing;
  timing["table"] = {
      {"mh_mgt",
       {{"fee_per_nominal_sample", mgt_avg.fee_per_nominal},
        {"effective_sampling_rate", mgt_avg.effective_sampling_rate},
        {"fee_per_effective_sample", mgt_avg.fee_per_effective}}},
      {"slice",
       {{"fee_per_nominal_sample", slice_avg.fee_per_nominal},
        {"effective_sampling_rate", slice_avg.effective_sampling_rate},
        {"fee_per_effective_sample", slice_avg.fee_per_effective}}}};
  timing["slice_over_mgt_fee_per_effective"] = speedup;
  timing["runs"] = per_run_timing;
  write_json(s.file("benchmark.timing.json"), s.provenance, timing);

  std::ostringstream msg;
  msg << "FEE per effective sample: mh-mgt " << mgt_avg.fee_per_effective << ", slice "
      << slice_avg.fee_per_effective << " (ratio " << speedup << ", slice width " << best_width
      << ")";
  s.outcome.summary = msg.str();
  return s.outcome;
}

// ---------------------------------------------------------------------------

CommandOutcome cmd_hb(const CommonOptions& options) {
  Session s = open_session(options, "hb");
  auto& c = s.cfg;
  std::optional<HbSimulation> sim;
  HbModelSpec spec;
  if (c.has("data") || c.has("upper")) {
    const fs::path obs = s.data_path("data");
    const fs::path upper = s.data_path("upper");
    spec = read_hb_csv(obs, upper);
  } else {
    HbSimulatorConfig sc;
    sc.J = c.get_int("groups", sc.J);
    sc.K = c.get_int("n_cov", sc.K);
    sc.L = c.get_int("n_upper", sc.L);
    sc.n_min = c.get_int("n_min", sc.n_min);
    sc.n_max = c.get_int("n_max", sc.n_max);
    sc.gamma_sd = c.get_double("gamma_sd", sc.gamma_sd);
    sc.beta_sd = c.get_double("beta_sd", sc.beta_sd);
    if (sc.J < 1 || sc.K < 1 || sc.L < 1) c.reject("groups", "groups, n_cov, n_upper must be >= 1");
    if (sc.n_min < 1 || sc.n_max < sc.n_min) c.reject("n_min", "need 1 <= n_min <= n_max");
    Rng rng = make_rng(s.seed, 0);
    sim = simulate_hb(sc, rng);
    spec = sim->spec;
  }
  spec.gamma_shape = c.get_double("prior_shape", spec.gamma_shape);
  spec.gamma_rate = c.get_double("prior_rate", spec.gamma_rate);
  spec.gamma_precision = c.get_double("prior_lambda", spec.gamma_precision);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    c.reject("prior_shape", e.what());
  }
  HbConfig hc;
  hc.n_burnin = c.get_u64("n_burnin", default_count(s, 500, 100));
  hc.n_newton = c.get_u64("n_newton", hc.n_burnin / 2);
  hc.n_samples = c.get_u64("n_samples", default_count(s, 500, 200));
  hc.block_size = c.get_int("block_size", 5);
  hc.slice.width = c.get_double("slice_width", 1.0);
  hc.slice.seed = s.seed;
  if (hc.n_newton > hc.n_burnin) c.reject("n_newton", "must not exceed n_burnin");
  if (hc.block_size < 1) c.reject("block_size", "must be >= 1");
  if (!(hc.slice.width > 0)) c.reject("slice_width", "must be positive");
  seal(s);

  const Index J = spec.J(), K = spec.K(), L = spec.L();
  Rng mgt_rng = make_rng(s.seed, 1), slice_rng = make_rng(s.seed, 2);
  hc.sampler = BetaSampler::MgtBlocks;
  const HbTrace mgt = hb_gibbs(spec, hc, mgt_rng);
  hc.sampler = BetaSampler::Slice;
  const HbTrace slice = hb_gibbs(spec, hc, slice_rng);

  const auto write_draws = [&](const std::string& name, const HbTrace& t) {
    std::vector<std::string> header{"cycle"};
    for (Index j = 0; j < J; ++j)
      for (Index k = 0; k < K; ++k)
        header.push_back("beta_" + std::to_string(j) + "_" + std::to_string(k + 1));
    for (Index l = 0; l < L; ++l)
      for (Index k = 0; k < K; ++k)
        header.push_back("gamma_" + std::to_string(l + 1) + "_" + std::to_string(k + 1));
    for (Index k = 0; k < K; ++k) header.push_back("tau_" + std::to_string(k + 1));
    CsvWriter out(s.file(name), "mhmgt.hb-draws", s.provenance, header);
    for (Index i = 0; i < t.beta.rows(); ++i) {
      std::vector<std::string> row{std::to_string(i + 1)};
      for (Index c2 = 0; c2 < t.beta.cols(); ++c2) row.push_back(format_real(t.beta(i, c2)));
      for (Index c2 = 0; c2 < t.gamma.cols(); ++c2) row.push_back(format_real(t.gamma(i, c2)));
      for (Index c2 = 0; c2 < t.tau.cols(); ++c2) row.push_back(format_real(t.tau(i, c2)));
      out.row(row);
    }
  };
  write_draws("hb_draws_mgt.csv", mgt);
  write_draws("hb_draws_slice.csv", slice);

  struct Column {
    double mean, sd, ess, mcse;
  };
  const auto stats = [](const Matrix& m, Index col) {
    const Index n = m.rows();
    const double mean = m.col(col).mean();
    const double sd = n > 1 ? std::sqrt((m.col(col).array() - mean).square().sum() / (n - 1)) : 0.0;
    double ess = std::numeric_limits<double>::quiet_NaN(), se = ess;
    if (n >= 10) {
      const auto e = effective_size(column_span(m, col));
      ess = e.ess;
      se = e.degenerate ? 0.0 : sd / std::sqrt(e.ess);
    }
    return Column{mean, sd, ess, se};
  };
  const auto cell = [](double v) { return std::isfinite(v) ? format_real(v) : std::string("NA"); };

  const std::size_t n = mgt.beta.rows();
  std::size_t agree = 0, covered_mgt = 0, covered_slice = 0;
  double ess_mgt = 0, ess_slice = 0;
  {
    std::vector<std::string> header{"group", "coefficient"};
    if (sim) header.push_back("true_value");
    for (const char* p : {"mgt", "slice"})
      for (const char* f : {"mean", "sd", "mcse", "ess"}) header.push_back(std::string(p) + "_" + f);
    header.push_back("mean_diff_over_mcse");
    CsvWriter out(s.file("hb_table.csv"), "mhmgt.hb-table", s.provenance, header);
    const auto covers = [&](const Matrix& m, Index col, double truth) {
      std::vector<double> v(m.col(col).data(), m.col(col).data() + m.rows());
      std::sort(v.begin(), v.end());
      const double lo = v[static_cast<std::size_t>(0.025 * v.size())];
      const double hi = v[static_cast<std::size_t>(0.975 * v.size()) - 1];
      return truth >= lo && truth <= hi;
    };
    for (Index j = 0; n > 0 && j < J; ++j) {
      for (Index k = 0; k < K; ++k) {
        const Index col = j * K + k;
        const Column a = stats(mgt.beta, col), b = stats(slice.beta, col);
        const double z = (a.mean - b.mean) / std::hypot(a.mcse, b.mcse);
        agree += std::abs(z) <= 3.0;
        ess_mgt += a.ess;
        ess_slice += b.ess;
        std::vector<std::string> row{std::to_string(j), std::to_string(k + 1)};
        if (sim) {
          const double truth = sim->beta_true(j, k);
          row.push_back(format_real(truth));
          covered_mgt += covers(mgt.beta, col, truth);
          covered_slice += covers(slice.beta, col, truth);
        }
        for (const Column& col_stats : {a, b}) {
          row.push_back(format_real(col_stats.mean));
          row.push_back(format_real(col_stats.sd));
          row.push_back(cell(col_stats.mcse));
          row.push_back(cell(col_stats.ess));
        }
        row.push_back(cell(z));
        out.row(row);
      }
    }
  }
  const double n_coef = static_cast<double>(J * K);
  const double avg_ess_mgt = n > 0 ? ess_mgt / n_coef : std::numeric_limits<double>::quiet_NaN();
  const double avg_ess_slice = n > 0 ? ess_slice / n_coef : std::numeric_limits<double>::quiet_NaN();

  json body;
  body["model"] = {{"groups", J}, {"n_cov", K}, {"n_upper", L}, {"simulated", sim.has_value()}};
  body["n_samples"] = n;
  body["coefficients"] = J * K;
  body["mh_mgt"] = {{"average_effective_size", number(avg_ess_mgt)},
                    {"hessian_failures", mgt.hessian_failures},
                    {"block_acceptance_rate",
                     mgt.block_steps ? number(double(mgt.block_accepts) / mgt.block_steps) : json(nullptr)},
                    {"counters", cost_json(mgt.beta_cost)}};
  body["slice"] = {{"average_effective_size", number(avg_ess_slice)},
                   {"counters", cost_json(slice.beta_cost)}};
  body["means_within_3_mcse"] = n >= 10 ? json(agree) : json(nullptr);
  if (sim && n > 0) {
    body["coverage_95"] = {{"mh_mgt", covered_mgt}, {"slice", covered_slice}};
  }
  write_json(s.file("hb_summary.json"), s.provenance, body);

  json timing;
  for (const auto& [name, t, avg] : {std::tuple{"mh_mgt", &mgt, avg_ess_mgt},
                                     std::tuple{"slice", &slice, avg_ess_slice}}) {
    timing[name] = {{"beta_time_seconds", t->beta_wall_time},
                    {"time_per_independent_sample", number(t->beta_wall_time / avg)}};
  }
  write_json(s.file("hb.timing.json"), s.provenance, timing);

  std::ostringstream msg;
  msg << "hb: " << n << " cycles, " << agree << "/" << J * K
      << " coefficient means within 3 MCSE, Hessian incidents " << mgt.hessian_failures;
  s.outcome.summary = msg.str();
  return s.outcome;
}

// ---------------------------------------------------------------------------

CommandOutcome cmd_theorem(const CommonOptions& options) {
  Session s = open_session(options, "theorem");
  const std::size_t count = s.cfg.get_u64("instances", default_count(s, 100, 20));
  seal(s);

  const CampaignReport report = run_campaign(random_instances(count, s.seed));
  JsonLinesWriter out(s.file("theorem.jsonl"));
  out.write({{"provenance", provenance_json(s.provenance)}});
  double worst_assembly = 0, worst_identity = 0, worst_witness = 0;
  for (const auto& o : report.outcomes) {
    const auto& inst = o.instance;
    json rec;
    rec["instance"] = {{"groups", inst.groups()},
                       {"block_sizes", inst.block_sizes},
                       {"observations", inst.observations},
                       {"family", to_string(inst.family)},
                       {"deficiency", inst.deficiency},
                       {"seed", inst.seed}};
    rec["predicted"] = to_string(o.predicted);
    rec["observed"] = to_string(o.observed);
    rec["passed"] = o.passed;
    rec["assembly_rel_err"] = number(o.assembly_rel_err);
    rec["qi_identity_rel_err"] = number(o.qi_identity_rel_err);
    rec["witness_rel"] = o.witness_rel ? number(*o.witness_rel) : json(nullptr);
    rec["failure"] = o.failure;
    out.write(rec);
    worst_assembly = std::max(worst_assembly, o.assembly_rel_err);
    worst_identity = std::max(worst_identity, o.qi_identity_rel_err);
    if (o.witness_rel) worst_witness = std::max(worst_witness, *o.witness_rel);
  }
  json body;
  body["instances"] = report.outcomes.size();
  body["passed"] = report.passed();
  body["max_assembly_rel_err"] = worst_assembly;
  body["max_qi_identity_rel_err"] = worst_identity;
  body["max_witness_rel"] = worst_witness;
  write_json(s.file("theorem_summary.json"), s.provenance, body);

  s.outcome.ok = report.all_passed();
  std::ostringstream msg;
  msg << "theorem: " << report.passed() << "/" << report.outcomes.size() << " instances passed";
  s.outcome.summary = msg.str();
  return s.outcome;
}

// ---------------------------------------------------------------------------

CommandOutcome cmd_mixing_scan(const CommonOptions& options) {
  Session s = open_session(options, "mixing-scan");
  auto& c = s.cfg;
  const auto sizes = c.get_ints("n_list", std::vector<std::int64_t>{1, 10, 100});
  const auto observation = c.get_int("observation", 1);
  const std::size_t n_steps = c.get_u64("n_steps", default_count(s, 30000, 5000));
  for (auto n : sizes) {
    if (n < 1) c.reject("n_list", "entries must be >= 1");
  }
  if (observation < 1) c.reject("observation", "must be >= 1 so the mode exists");
  seal(s);

  CsvWriter out(s.file("mixing_scan.csv"), "mhmgt.mixing-scan", s.provenance,
                {"n_obs", "observation", "mode", "eta0", "eta0_sqrt_n", "acceptance_rate",
                 "rejection_rate"});
  json rows = json::array();
  std::vector<std::pair<std::int64_t, double>> acceptance;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto target =
        poisson_lograte_target(std::vector<int>(sizes[i], static_cast<int>(observation)));
    const double mode = find_mode(*target);
    const double eta = mixing_index(*target);
    Rng rng = make_rng(s.seed, i);
    const auto trace = run_chain(*target, Vector::Constant(1, mode),
                                 MgtConfig{0, 0, n_steps, s.seed, true}, rng);
    const double acc = n_steps > 0 ? trace.acceptance_rate() : std::numeric_limits<double>::quiet_NaN();
    const double scaled = eta * std::sqrt(static_cast<double>(sizes[i]));
    out.row({std::to_string(sizes[i]), std::to_string(observation), format_real(mode),
             format_real(eta), format_real(scaled), format_real(acc), format_real(1 - acc)});
    rows.push_back({{"n_obs", sizes[i]}, {"mode", mode}, {"eta0", eta}, {"eta0_sqrt_n", scaled},
                    {"acceptance_rate", number(acc)}});
    acceptance.emplace_back(sizes[i], acc);
  }
  std::sort(acceptance.begin(), acceptance.end());
  bool monotone = true;
  for (std::size_t i = 1; i < acceptance.size(); ++i) {
    monotone = monotone && acceptance[i].second >= acceptance[i - 1].second;
  }
  json body;
  body["rows"] = rows;
  body["acceptance_nondecreasing_in_n"] = monotone;
  write_json(s.file("mixing_scan.json"), s.provenance, body);

  std::ostringstream msg;
  msg << "mixing-scan: " << sizes.size() << " targets, acceptance "
      << (monotone ? "non-decreasing" : "NOT monotone") << " in N";
  s.outcome.summary = msg.str();
  return s.outcome;
}

}  // namespace mhmgt::cli
