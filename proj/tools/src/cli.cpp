#include "cli.hpp"

#include <cstdlib>
#include <optional>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "json_util.hpp"
#include "lagcast/error.hpp"
#include "lagcast/io.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/synthdata.hpp"

namespace lagcast::cli {
namespace {

using pipeline::ExperimentConfig;

// Raw flag values; unset optionals leave the config file (or default) alone.
struct Flags {
  std::string config;
  std::vector<std::string> files;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string from, to;
  std::string target;
  std::string channel;
  bool returns = false;
  std::optional<double> lambda;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_sweeps;
  bool standardize = false;
  std::optional<std::size_t> history;
  std::vector<std::string> lag_channels;
  bool no_covariates = false;
  std::string preset;
  std::optional<std::size_t> kmin, kmax, step;
  std::optional<double> train_frac;
  std::string pca_scaling;
  std::optional<std::size_t> threads;
  bool verbose = false;
  bool quiet = false;
};

struct GenerateFlags {
  std::string kind = "ar";
  std::vector<double> phi;
  std::size_t factors = 3;
  std::vector<double> loadings;
  std::string corr;
  std::vector<std::string> labels;
  double noise = 1.0;
  double level = 100.0;
  std::size_t n = 1000;
  std::size_t burn_in = 500;
  std::string instrument = "SYNTH";
  std::string start = "2015-01-02";
};

Date date_flag(const std::string& flag, const std::string& text) {
  const auto d = Date::parse_iso(text);
  if (!d) throw ConfigError(fmt::format("{} expects a YYYY-MM-DD date (got '{}')", flag, text));
  return *d;
}

pipeline::InputSpec input_spec(const std::string& arg) {
  pipeline::InputSpec s;
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) {
    s.label = arg.substr(0, eq);
    s.path = arg.substr(eq + 1);
  } else {
    s.path = arg;
    s.label = s.path.stem().string();
  }
  return s;
}

std::filesystem::path env_output_dir() {
  const char* v = std::getenv(kOutputEnv);
  return v && *v ? std::filesystem::path(v) : std::filesystem::path(pipeline::kDefaultOutputDir);
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : pipeline::load_config(f.config);
  if (!f.preset.empty()) pipeline::apply_preset(c, f.preset);
  if (!f.files.empty()) {
    c.inputs.clear();
    for (const auto& a : f.files) c.inputs.push_back(input_spec(a));
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (c.output_dir.empty()) c.output_dir = env_output_dir();
  if (f.seed) c.seed = *f.seed;
  if (!f.from.empty()) c.date_from = date_flag("--from", f.from);
  if (!f.to.empty()) c.date_to = date_flag("--to", f.to);
  if (!f.target.empty()) c.target = f.target;
  if (!f.channel.empty()) c.channel = parse_channel(f.channel);
  if (f.returns) c.log_returns = true;
  if (f.lambda) c.lasso.lambda = *f.lambda;
  if (f.tolerance) c.lasso.tolerance = *f.tolerance;
  if (f.max_sweeps) c.lasso.max_sweeps = *f.max_sweeps;
  if (f.standardize) c.lasso.standardize_features = true;
  if (f.history) c.lag_spec.history_points = *f.history;
  if (!f.lag_channels.empty()) {
    c.lag_spec.channels.clear();
    for (const auto& ch : f.lag_channels) c.lag_spec.channels.push_back(parse_channel(ch));
  }
  if (f.no_covariates) c.lag_spec.include_current_covariates = false;
  if (f.kmin) c.sweep.k_min = *f.kmin;
  if (f.kmax) c.sweep.k_max = *f.kmax;
  if (f.step) c.sweep.step = *f.step;
  if (f.train_frac) c.train_fraction = *f.train_frac;
  if (!f.pca_scaling.empty()) c.pca_scaling = pca::parse_scaling(f.pca_scaling);
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

Matrix parse_corr(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> values;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw ConfigError(fmt::format("--corr: '{}' is not a number", cell));
      }
    }
    rows.push_back(std::move(values));
  }
  for (const auto& r : rows)
    if (r.size() != rows.size()) throw ConfigError("--corr must be a square matrix written as 'a,b;c,d'");
  return Matrix::from_rows(rows);
}

void generate(const Flags& f, const GenerateFlags& g, std::ostream& out) {
  synth::GeneratorSpec spec;
  spec.kind = synth::parse_kind(g.kind);
  spec.ar_coefficients = g.phi;
  spec.factor_count = g.factors;
  spec.loadings = g.loadings;
  if (!g.corr.empty()) spec.correlation = parse_corr(g.corr);
  spec.labels = g.labels;
  spec.noise_scale = g.noise;
  spec.level = g.level;
  spec.length = g.n;
  spec.burn_in = g.burn_in;
  spec.instrument = g.instrument;
  spec.start = date_flag("--start", g.start);
  if (f.seed) spec.seed = *f.seed;

  const auto result = synth::generate(spec);
  const std::filesystem::path dir = f.out.empty() ? env_output_dir() : std::filesystem::path(f.out);
  std::vector<std::string> written;
  if (const auto* frame = std::get_if<SeriesFrame>(&result)) {
    io::write_text_file(dir / (frame->instrument() + ".csv"), to_csv(*frame));
    written.push_back(frame->instrument() + ".csv");
  } else {
    const auto& panel = std::get<AlignedPanel>(result);
    io::write_text_file(dir / "panel.csv", to_csv(panel));
    written.push_back("panel.csv");
    for (const auto& frame : synth::panel_to_frames(panel, spec.seed, 0.1 * spec.noise_scale)) {
      io::write_text_file(dir / (frame.instrument() + ".csv"), to_csv(frame));
      written.push_back(frame.instrument() + ".csv");
    }
  }

  nlohmann::ordered_json cfg;
  cfg["kind"] = synth::kind_name(spec.kind);
  cfg["ar_coefficients"] = spec.ar_coefficients;
  cfg["factor_count"] = spec.factor_count;
  cfg["loadings"] = spec.loadings;
  cfg["correlation"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < spec.correlation.rows(); ++i) {
    auto r = spec.correlation.row(i);
    cfg["correlation"].push_back(std::vector<double>(r.begin(), r.end()));
  }
  cfg["labels"] = spec.labels;
  cfg["noise_scale"] = spec.noise_scale;
  cfg["level"] = spec.level;
  cfg["length"] = spec.length;
  cfg["burn_in"] = spec.burn_in;
  cfg["seed"] = spec.seed;
  cfg["instrument"] = spec.instrument;
  cfg["start"] = spec.start.iso();
  nlohmann::ordered_json m;
  m["tool"] = "lagcast";
  m["version"] = pipeline::kVersion;
  m["command"] = "generate";
  m["config"] = cfg;
  m["results"]["files"] = written;
  io::write_text_file(dir / "run_manifest.json", json_util::dump(m));
  if (!f.quiet)
    for (const auto& w : written) out << "wrote " << (dir / w).string() << "\n";
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON experiment config");
  sub->add_option("--out", f.out, fmt::format("Output directory (default ${} or {})", kOutputEnv, pipeline::kDefaultOutputDir));
  sub->add_option("--seed", f.seed, "Seed recorded in the manifest");
  sub->add_option("--from", f.from, "First date (YYYY-MM-DD)");
  sub->add_option("--to", f.to, "Last date (YYYY-MM-DD)");
  sub->add_flag("-v,--verbose", f.verbose, "Print progress to stderr");
  sub->add_flag("-q,--quiet", f.quiet, "Print nothing on success");
}

void add_inputs(CLI::App* sub, Flags& f) {
  sub->add_option("files", f.files, "OHLCV CSV files, optionally LABEL=PATH");
}

void add_lasso(CLI::App* sub, Flags& f) {
  sub->add_option("--lambda", f.lambda, "LASSO penalty (default: chosen on a validation tail)");
  sub->add_option("--tolerance", f.tolerance, "Coordinate descent tolerance");
  sub->add_option("--max-sweeps", f.max_sweeps, "Coordinate descent sweep cap");
  sub->add_flag("--standardize", f.standardize, "Standardize features before the LASSO fit");
}

void add_lags(CLI::App* sub, Flags& f) {
  sub->add_option("--target", f.target, "Label of the instrument to model");
  sub->add_option("--history", f.history, "Lag depth H");
  sub->add_option("--channels", f.lag_channels, "Lagged channels (comma separated)")->delimiter(',');
  sub->add_flag("--no-covariates", f.no_covariates, "Drop the same-day covariate columns");
  sub->add_option("--preset", f.preset, "Named configuration (deep-history)");
}

void print_table(std::ostream& out, const std::string& csv) { out << csv; }

int dispatch(const std::string& name, const Flags& f, const GenerateFlags& g, std::ostream& out, std::ostream& err) {
  if (name == "generate") {
    generate(f, g, out);
    return 0;
  }
  const ExperimentConfig c = build_config(f);
  if (f.verbose) err << "lagcast " << name << ": output directory " << c.resolved_output_dir().string() << "\n";

  if (name == "correlate") {
    const auto r = pipeline::run_correlate(c);
    if (!f.quiet) {
      out << fmt::format("aligned {} rows from {} to {}\n", r.panel.rows(), r.panel.dates.front().iso(),
                         r.panel.dates.back().iso());
      print_table(out, stats::to_csv(r.correlations));
    }
  } else if (name == "influence") {
    const auto r = pipeline::run_influence(c);
    if (!f.quiet) {
      out << fmt::format("target {} lambda {}\n", r.influence.target, io::fixed6(r.influence.fit.lambda));
      print_table(out, lasso::weights_csv(r.influence.labels, r.influence.weights));
    }
  } else if (name == "lags") {
    const auto x = pipeline::run_lags(c);
    if (!f.quiet) out << fmt::format("lag matrix {} rows x {} columns\n", x.rows(), x.cols());
  } else if (name == "profile") {
    const auto r = pipeline::run_feedback_profile(c);
    if (!f.quiet)
      out << fmt::format("{} weights: {} positive, {} negative, {} zero (lambda {})\n", r.profile.entries.size(),
                         r.profile.positive, r.profile.negative, r.profile.zero, io::fixed6(r.profile.fit.lambda));
  } else if (name == "sweep") {
    const auto r = pipeline::run_pca_sweep(c);
    if (!f.quiet) {
      print_table(out, pipeline::sweep_csv(r));
      out << fmt::format("chosen k {} ({} train rows, {} test rows)\n", r.chosen_k, r.train_rows, r.test_rows);
    }
  }
  if (f.verbose) err << "lagcast " << name << ": done\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-asset correlation, LASSO influence, lag features and PCA regression sweeps", "lagcast"};
  app.set_version_flag("--version", std::string(pipeline::kVersion));
  app.require_subcommand(1, 1);

  Flags f;
  GenerateFlags g;

  auto* correlate = app.add_subcommand("correlate", "Align instruments and write the correlation matrix and heat map");
  add_common(correlate, f);
  add_inputs(correlate, f);
  correlate->add_option("--channel", f.channel, "Price channel (default close)");
  correlate->add_flag("--returns,--log-returns", f.returns, "Use log returns instead of price levels");

  auto* influence = app.add_subcommand("influence", "LASSO influence weights of every instrument on the target");
  add_common(influence, f);
  add_inputs(influence, f);
  influence->add_option("--target", f.target, "Label of the instrument to explain");
  influence->add_option("--channel", f.channel, "Price channel (default close)");
  influence->add_flag("--returns,--log-returns", f.returns, "Use log returns instead of price levels");
  add_lasso(influence, f);

  auto* lags = app.add_subcommand("lags", "Write the lag-feature matrix of one instrument");
  add_common(lags, f);
  add_inputs(lags, f);
  add_lags(lags, f);

  auto* profile = app.add_subcommand("profile", "LASSO weight of every lag (feedback profile)");
  add_common(profile, f);
  add_inputs(profile, f);
  add_lags(profile, f);
  add_lasso(profile, f);

  auto* sweep = app.add_subcommand("sweep", "PCA component sweep with linear regression");
  add_common(sweep, f);
  add_inputs(sweep, f);
  add_lags(sweep, f);
  sweep->add_option("--kmin", f.kmin, "Smallest component count");
  sweep->add_option("--kmax", f.kmax, "Largest component count");
  sweep->add_option("--step", f.step, "Component count step");
  sweep->add_option("--train-frac", f.train_frac, "Chronological training fraction");
  sweep->add_option("--pca-scaling", f.pca_scaling, "covariance or correlation");
  sweep->add_option("--threads", f.threads, "Worker threads (0 = all cores)");

  auto* gen = app.add_subcommand("generate", "Write a deterministic synthetic OHLCV series");
  gen->add_option("--out", f.out, fmt::format("Output directory (default ${} or {})", kOutputEnv, pipeline::kDefaultOutputDir));
  gen->add_option("--seed", f.seed, "PRNG seed (default 1)");
  gen->add_flag("-q,--quiet", f.quiet, "Print nothing on success");
  gen->add_option("--kind", g.kind, "ar, latent, corr or white")->capture_default_str();
  gen->add_option("--phi", g.phi, "AR coefficients (comma separated)")->delimiter(',');
  gen->add_option("--factors", g.factors, "Latent factor count")->capture_default_str();
  gen->add_option("--loadings", g.loadings, "Latent factor loadings (comma separated)")->delimiter(',');
  gen->add_option("--corr", g.corr, "Target correlation, rows separated by ';'");
  gen->add_option("--labels", g.labels, "Panel column labels (comma separated)")->delimiter(',');
  gen->add_option("--noise", g.noise, "Noise scale")->capture_default_str();
  gen->add_option("--level", g.level, "Price level")->capture_default_str();
  gen->add_option("--n", g.n, "Number of trading days")->capture_default_str();
  gen->add_option("--burn-in", g.burn_in, "AR warm-up steps")->capture_default_str();
  gen->add_option("--instrument", g.instrument, "Instrument name / file stem")->capture_default_str();
  gen->add_option("--start", g.start, "First calendar date")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << pipeline::kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto& chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return dispatch(name, f, g, out, err);
  } catch (const InvariantError& e) {
    err << "error: internal invariant failed: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 2;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"lagcast"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lagcast::cli
