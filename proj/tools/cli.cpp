#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mimpact/distributions.hpp"
#include "mimpact/farmer_model.hpp"
#include "mimpact/impact_engine.hpp"
#include "mimpact/ingestion.hpp"
#include "mimpact/reconstruction.hpp"
#include "mimpact/synthetic_market.hpp"
#include "mimpact/text.hpp"
#include "mimpact/version.hpp"

namespace mimpact::cli {

namespace fs = std::filesystem;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir;
  std::string zone = ExchangeCalendar::kDefaultZone;
};

struct Inputs {
  std::string orders;
  std::string tape;
  int min_length = 2;
  std::optional<std::int64_t> max_gap_ms;
};

class Outputs {
 public:
  Outputs(const std::string& dir, std::string subcommand) : dir_(dir), sub_(std::move(subcommand)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (!fs::is_directory(dir_)) throw InputError("output directory not usable: " + dir_.string());
  }

  /// Opens a file whose first line names the producing subcommand and version.
  std::ofstream open(const std::string& name) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << "# produced-by: mimpact " << sub_ << ' ' << kVersion << '\n';
    written_.push_back(path.string());
    return f;
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::string sub_;
  std::vector<std::string> written_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  return f;
}

struct Loaded {
  std::vector<Metaorder> metaorders;
  TapeSet tapes;
  std::size_t fills = 0;
  std::size_t discarded_groups = 0;
  std::size_t missing_tape = 0;
};

Loaded load(const Inputs& in, const Common& common, Outputs& outputs, std::ostream& err) {
  const ExchangeCalendar calendar(common.zone);
  Loaded loaded;

  auto orders_stream = open_input(in.orders);
  OrderLog log = parse_order_log(orders_stream, calendar);
  loaded.fills = log.fills.size();
  if (!log.rejections.empty()) {
    err << "orders: " << log.rejections.size() << " line(s) rejected\n";
    auto f = outputs.open("rejections_orders.csv");
    write_rejections(f, log.rejections);
  }

  ReconstructionOptions options;
  options.max_gap_ms = in.max_gap_ms;
  Reconstruction rec = reconstruct_metaorders(log.fills, options);
  loaded.discarded_groups = rec.discarded_groups;
  std::vector<Metaorder> metaorders = filter_min_length(rec.metaorders, in.min_length);

  if (!in.tape.empty()) {
    auto tape_stream = open_input(in.tape);
    MarketTape tape = parse_market_tape(tape_stream, calendar);
    if (!tape.rejections.empty()) {
      err << "tape: " << tape.rejections.size() << " line(s) rejected\n";
      auto f = outputs.open("rejections_tape.csv");
      write_rejections(f, tape.rejections);
    }
    metaorders = enrich_all(metaorders, tape.tapes, &loaded.missing_tape);
    if (loaded.missing_tape > 0) err << "tape: " << loaded.missing_tape << " metaorder(s) without a tape skipped\n";
    loaded.tapes = std::move(tape.tapes);
  }
  loaded.metaorders = std::move(metaorders);
  return loaded;
}

std::string fmt_or_empty(std::optional<double> v) { return v ? text::fmt(*v) : std::string(); }

void add_inputs(CLI::App* app, Inputs& in, bool tape_required) {
  app->add_option("--orders", in.orders, "Order log (CSV)")->required();
  auto* tape = app->add_option("--tape", in.tape, "Market tape (CSV)");
  if (tape_required) tape->required();
  app->add_option("--min-length", in.min_length, "Keep metaorders with N >= n")->check(CLI::Range(2, 1 << 30));
  app->add_option("--max-gap-ms", in.max_gap_ms, "Split a key's fills at idle gaps longer than this");
}

// -------------------------------------------------------------- subcommands

void cmd_reconstruct(const Inputs& in, const Common& common, std::ostream& out, std::ostream& err) {
  Outputs outputs(common.out_dir, "reconstruct");
  Loaded loaded = load(in, common, outputs, err);
  auto f = outputs.open("metaorders.csv");
  write_metaorder_summary(f, loaded.metaorders);
  out << "metaorders: " << loaded.metaorders.size() << " (from " << loaded.fills << " fills, "
      << loaded.discarded_groups << " single-fill groups discarded)\n";
}

struct AnalyzeOptions {
  std::size_t buckets = 100;
  int relaxation_points = 50;
  bool nonlinear_fit = false;
};

void cmd_analyze(const Inputs& in, const AnalyzeOptions& opt, const Common& common, std::ostream& out,
                 std::ostream& err) {
  Outputs outputs(common.out_dir, "analyze");
  Loaded loaded = load(in, common, outputs, err);
  if (loaded.metaorders.empty()) throw InputError("no metaorders to analyze");

  PathSet paths = compute_impact_paths(loaded.metaorders, loaded.tapes, {opt.relaxation_points});
  const ImpactCurve curve = impact_dynamics(paths.paths, {opt.buckets});

  ImpactCurve execution_only;
  execution_only.points = curve.phase_points(Phase::execution);
  {
    auto f = outputs.open("dynamics_execution.csv");
    write_curve(f, execution_only);
  }
  {
    auto f = outputs.open("dynamics_relaxation.csv");
    write_curve(f, curve);
  }

  std::vector<double> fx, fy;
  for (const auto& p : execution_only.points) {
    if (p.rescaled_time > 0.0 && p.mean_signed_impact > 0.0) {
      fx.push_back(p.rescaled_time);
      fy.push_back(p.mean_signed_impact);
    }
  }
  if (fx.size() >= 3) {
    auto f = outputs.open("execution_fit.csv");
    write_power_law_fit(f, fit_power_law(fx, fy, opt.nonlinear_fit ? FitMethod::nonlinear : FitMethod::log_ols));
  } else {
    err << "execution fit skipped: fewer than 3 positive buckets\n";
  }

  std::vector<double> durations, lengths_d, participation;
  std::vector<int> lengths;
  for (const auto& m : loaded.metaorders) {
    durations.push_back(m.duration_s());
    lengths.push_back(m.length());
    lengths_d.push_back(m.length());
    if (m.participation()) participation.push_back(*m.participation());
  }
  {
    auto f = outputs.open("distribution_duration.csv");
    write_histogram(f, empirical_histogram(durations, Binning::logarithmic(50)));
  }
  {
    auto f = outputs.open("distribution_length.csv");
    write_histogram(f, empirical_histogram(lengths_d, Binning::integer()));
  }
  if (!participation.empty()) {
    auto f = outputs.open("distribution_participation.csv");
    write_histogram(f, empirical_histogram(participation, Binning::logarithmic(50)));
  }

  std::optional<double> beta_mle;
  {
    auto f = outputs.open("beta.csv");
    f << "method,beta,standard_error,samples,points_used,error\n";
    for (BetaMethod method : {BetaMethod::mle, BetaMethod::loglog_regression}) {
      f << to_string(method) << ',';
      try {
        const BetaEstimate e = estimate_beta(lengths, method);
        f << text::fmt(e.beta) << ',' << text::fmt(e.standard_error) << ',' << e.samples << ',' << e.points_used
          << ",\n";
        if (method == BetaMethod::mle) beta_mle = e.beta;
      } catch (const std::invalid_argument& ex) {
        f << ",," << lengths.size() << ",," << ex.what() << '\n';
      }
    }
  }

  std::optional<double> temporary, permanent;
  temporary = temporary_impact(curve);
  if (!curve.phase_points(Phase::relaxation).empty()) permanent = permanent_impact(curve);
  std::size_t truncated = 0;
  for (const auto& p : paths.paths) truncated += p.relaxation_truncated;
  {
    auto f = outputs.open("summary.csv");
    f << "key,value\n";
    f << "metaorders," << loaded.metaorders.size() << '\n';
    f << "paths," << paths.paths.size() << '\n';
    f << "relaxation_truncated," << truncated << '\n';
    f << "temporary_impact," << fmt_or_empty(temporary) << '\n';
    f << "permanent_impact," << fmt_or_empty(permanent) << '\n';
    f << "permanent_over_temporary,"
      << fmt_or_empty(permanent && temporary ? std::optional<double>(*permanent / *temporary) : std::nullopt) << '\n';
    f << "terminal_artifact," << (curve.terminal_artifact ? 1 : 0) << '\n';
    f << "relaxation_proxy," << (curve.relaxation_proxy ? 1 : 0) << '\n';
    f << "seam_execution," << fmt_or_empty(curve.seam_execution) << '\n';
    f << "seam_mid," << fmt_or_empty(curve.seam_mid) << '\n';
    f << "beta_mle," << fmt_or_empty(beta_mle) << '\n';
  }
  out << "metaorders: " << loaded.metaorders.size() << "\ntemporary impact: " << fmt_or_empty(temporary)
      << "\npermanent impact: " << fmt_or_empty(permanent) << "\nbeta (mle): " << fmt_or_empty(beta_mle) << '\n';
}

struct SimulateOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  bool serial = false;
};

void read_config_file(const std::string& path, GeneratorConfig& config) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = text::chomp(line);
    const auto hash = v.find('#');
    if (hash != std::string_view::npos) v = v.substr(0, hash);
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      return s;
    };
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    config.set(std::string(trim(v.substr(0, eq))), std::string(trim(v.substr(eq + 1))));
  }
}

void cmd_simulate(const SimulateOptions& opt, const Common& common, std::ostream& out) {
  GeneratorConfig config;
  if (!opt.config_file.empty()) read_config_file(opt.config_file, config);
  for (const auto& [k, v] : opt.overrides) config.set(k, v);
  config.validate();
  const CorpusFiles files = generate_corpus(config, common.out_dir.empty() ? "." : common.out_dir, !opt.serial);
  out << "wrote " << config.count << " metaorders: " << files.orders.string() << ", " << files.tape.string()
      << ", " << files.truth.string() << '\n';
}

void cmd_farmer_curves(const FarmerParams& params, const Common& common, std::ostream& out) {
  Outputs outputs(common.out_dir, "farmer-curves");
  const ImpactSchedule s = ImpactSchedule::parallel(params);
  auto f = outputs.open("farmer_curves.csv");
  f << "t,continuation,r_plus,r_minus,immediate_impact,permanent_impact,ratio\n";
  for (int t = 1; t <= s.horizon(); ++t) {
    f << t << ',' << text::fmt(s.continuation(t)) << ',' << text::fmt(s.up_increment(t)) << ','
      << text::fmt(s.down_increment(t)) << ',' << text::fmt(s.immediate_impact(t)) << ',';
    if (t >= 2) f << text::fmt(s.permanent_impact(t)) << ',' << text::fmt(s.impact_ratio(t));
    else f << ',';
    f << '\n';
  }
  out << "ratio at N=" << s.horizon() << ": " << text::fmt(s.impact_ratio(s.horizon())) << " (1/beta = "
      << text::fmt(1.0 / params.beta) << ")\n";
}

void cmd_fair_pricing(const Inputs& in, int relaxation_points, const Common& common, std::ostream& out,
                      std::ostream& err) {
  Outputs outputs(common.out_dir, "fair-pricing");
  Loaded loaded = load(in, common, outputs, err);
  PathSet paths = compute_impact_paths(loaded.metaorders, loaded.tapes, {relaxation_points});
  const FairPricingReport report = fair_pricing_check(loaded.metaorders, paths.paths);
  {
    auto f = outputs.open("fair_pricing.csv");
    write_fair_pricing(f, loaded.metaorders, report);
  }
  {
    auto f = outputs.open("fair_pricing_fit.csv");
    f << "points,excluded_truncated,slope,intercept,rms_distance,max_abs_deviation\n"
      << report.points.size() << ',' << report.excluded_truncated << ',' << text::fmt(report.slope) << ','
      << text::fmt(report.intercept) << ',' << text::fmt(report.rms_distance) << ','
      << text::fmt(report.max_abs_deviation) << '\n';
  }
  out << "fair pricing: " << report.points.size() << " points, slope " << text::fmt(report.slope)
      << ", rms distance " << text::fmt(report.rms_distance) << '\n';
}

void cmd_sqrt_law(const Inputs& in, const Common& common, std::ostream& out, std::ostream& err) {
  Outputs outputs(common.out_dir, "sqrt-law");
  Loaded loaded = load(in, common, outputs, err);
  PathSet paths = compute_impact_paths(loaded.metaorders, loaded.tapes);
  const SqrtLawAnalysis a = square_root_analysis(loaded.metaorders, paths.paths);
  {
    auto f = outputs.open("sqrt_law.csv");
    write_sqrt_law(f, a);
  }
  {
    auto f = outputs.open("sqrt_law_fit.csv");
    f << "prefactor,delta,residual,point_count,duration_coefficient,duration_coefficient_se,excluded_nonpositive\n"
      << text::fmt(a.participation_fit.prefactor) << ',' << text::fmt(a.participation_fit.exponent) << ','
      << text::fmt(a.participation_fit.residual) << ',' << a.participation_fit.point_count << ','
      << text::fmt(a.duration_coefficient) << ',' << text::fmt(a.duration_coefficient_se) << ','
      << a.excluded_nonpositive << '\n';
  }
  {
    auto f = outputs.open("sqrt_law_dispersion.csv");
    f << "duration_lo_s,duration_hi_s,residual_sd,count\n";
    for (const auto& d : a.dispersion) {
      f << text::fmt(d.duration_lo) << ',' << text::fmt(d.duration_hi) << ',' << text::fmt(d.residual_sd) << ','
        << d.count << '\n';
    }
  }
  out << "delta " << text::fmt(a.participation_fit.exponent) << ", duration coefficient "
      << text::fmt(a.duration_coefficient) << " +/- " << text::fmt(a.duration_coefficient_se) << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metaorder reconstruction and market-impact analytics", "mimpact"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  if (const char* env = std::getenv("MIMPACT_OUTPUT_DIR")) common.out_dir = env;
  if (common.out_dir.empty()) common.out_dir = ".";
  app.add_option("--out", common.out_dir, "Output directory (default $MIMPACT_OUTPUT_DIR or .)");
  app.add_option("--zone", common.zone, "Exchange timezone as a POSIX TZ string");

  Inputs rec_in, ana_in, fair_in, sqrt_in;
  auto* reconstruct = app.add_subcommand("reconstruct", "Group fills into metaorders");
  add_inputs(reconstruct, rec_in, false);

  AnalyzeOptions ana;
  auto* analyze = app.add_subcommand("analyze", "Impact curves, distributions and beta");
  add_inputs(analyze, ana_in, true);
  analyze->add_option("--buckets", ana.buckets, "Buckets for the dynamics curves")->check(CLI::PositiveNumber);
  analyze->add_option("--relaxation-points", ana.relaxation_points, "Relaxation grid per metaorder")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--nonlinear-fit", ana.nonlinear_fit, "Refine the power-law fit by nonlinear least squares");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus with ground truth");
  simulate->add_option("--config", sim.config_file, "key=value generator settings; flags override");
  simulate->add_flag("--serial", sim.serial, "Simulate on one thread");
  const std::vector<std::pair<std::string, std::string>> sim_flags = {
      {"--beta", "beta"},
      {"--count", "count"},
      {"--seed", "seed"},
      {"--noise", "noise"},
      {"--horizon", "horizon"},
      {"--mean-gap-s", "mean_gap_s"},
      {"--decay-steps", "decay_steps"},
      {"--decay-ratio", "decay_ratio"},
      {"--buy-probability", "buy_probability"},
      {"--base-price", "base_price"},
      {"--impact-scale", "impact_scale"},
      {"--volume-multiplier-min", "volume_multiplier_min"},
      {"--volume-multiplier-max", "volume_multiplier_max"},
      {"--relaxation-quotes", "relaxation_quotes"},
      {"--mode", "mode"},
      {"--planted-gamma", "planted_gamma"},
      {"--planted-delta", "planted_delta"},
      {"--planted-noise", "planted_noise"},
  };
  std::map<std::string, std::string> sim_values;
  for (const auto& [flag, key] : sim_flags) {
    simulate->add_option(flag, sim_values[key], "Generator setting " + key);
  }

  FarmerParams farmer;
  auto* curves = app.add_subcommand("farmer-curves", "Exact model schedule table");
  curves->add_option("--beta", farmer.beta, "Tail exponent")->required();
  curves->add_option("--horizon", farmer.horizon, "Largest t");
  curves->add_option("--r0", farmer.r0_plus, "First increment R0+");
  curves->add_option("--r1", farmer.r1_plus, "Free constant R1+");

  int fair_points = 50;
  auto* fair = app.add_subcommand("fair-pricing", "VWAP versus post-relaxation price");
  add_inputs(fair, fair_in, true);
  fair->add_option("--relaxation-points", fair_points, "Relaxation grid per metaorder")->check(CLI::PositiveNumber);

  auto* sqrt_law = app.add_subcommand("sqrt-law", "Impact against participation and duration");
  add_inputs(sqrt_law, sqrt_in, true);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*reconstruct) cmd_reconstruct(rec_in, common, out, err);
    else if (*analyze) cmd_analyze(ana_in, ana, common, out, err);
    else if (*simulate) {
      for (const auto& [flag, key] : sim_flags) {
        if (simulate->count(flag) > 0) sim.overrides[key] = sim_values[key];
      }
      if (!common.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(common.out_dir, ec);
      }
      cmd_simulate(sim, common, out);
    } else if (*curves) {
      farmer.validate();
      cmd_farmer_curves(farmer, common, out);
    } else if (*fair) cmd_fair_pricing(fair_in, fair_points, common, out, err);
    else if (*sqrt_law) cmd_sqrt_law(sqrt_in, common, out, err);
    return 0;
  } catch (const InternalInvariantFailure& e) {
    err << "internal invariant failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace mimpact::cli
