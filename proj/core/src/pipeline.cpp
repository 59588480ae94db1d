#include "lagcast/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "json_util.hpp"
#include "lagcast/error.hpp"
#include "lagcast/io.hpp"

namespace lagcast::pipeline {
namespace {

using Json = nlohmann::ordered_json;

std::vector<Channel> parse_channels(const Json& j) {
  std::vector<Channel> out;
  for (const auto& c : j) out.push_back(parse_channel(c.get<std::string>()));
  return out;
}

lags::Covariate parse_covariate(const Json& j) {
  if (j.is_string()) return {parse_channel(j.get<std::string>()), 0};
  if (!j.is_object() || !j.contains("channel")) throw ConfigError("covariate must be a channel name or {\"channel\", \"lag\"}");
  return {parse_channel(j.at("channel").get<std::string>()), j.value("lag", std::size_t{0})};
}

Date parse_date(const std::string& s) {
  if (auto d = Date::parse_iso(s)) return *d;
  if (auto d = Date::parse_us(s)) return *d;
  throw ConfigError(fmt::format("invalid date '{}' (expected YYYY-MM-DD or MM/DD/YYYY)", s));
}

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(fmt::format("unknown key '{}' in {}", it.key(), where));
}

Json lag_spec_json(const lags::LagSpec& s) {
  Json j;
  j["channels"] = Json::array();
  for (Channel c : s.channels) j["channels"].push_back(std::string(channel_name(c)));
  j["history"] = s.history_points;
  j["include_current_covariates"] = s.include_current_covariates;
  j["covariates"] = Json::array();
  for (const auto& c : s.covariates) j["covariates"].push_back({{"channel", std::string(channel_name(c.channel))}, {"lag", c.lag}});
  j["target"] = std::string(channel_name(s.target));
  j["node_count"] = lags::node_count(s);
  return j;
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["inputs"] = Json::array();
  for (const auto& in : c.inputs) j["inputs"].push_back({{"path", in.path.generic_string()}, {"label", in.label}});
  j["target"] = c.target;
  j["date_from"] = c.date_from ? Json(c.date_from->iso()) : Json(nullptr);
  j["date_to"] = c.date_to ? Json(c.date_to->iso()) : Json(nullptr);
  j["channel"] = std::string(channel_name(c.channel));
  j["log_returns"] = c.log_returns;
  j["lags"] = lag_spec_json(c.lag_spec);
  j["lasso"] = {{"lambda", c.lasso.lambda ? Json(*c.lasso.lambda) : Json(nullptr)},
                {"tolerance", c.lasso.tolerance},
                {"max_sweeps", c.lasso.max_sweeps},
                {"standardize", c.lasso.standardize_features}};
  j["sweep"] = {{"k_min", c.sweep.k_min}, {"k_max", c.sweep.k_max}, {"step", c.sweep.step}};
  j["train_fraction"] = c.train_fraction;
  j["pca_scaling"] = std::string(pca::scaling_name(c.pca_scaling));
  j["output_dir"] = c.output_dir.generic_string();
  j["seed"] = c.seed;
  j["preset"] = c.preset;
  return j;
}

Json metrics_json(const regress::MetricsReport& m) {
  return {{"mse", m.mse}, {"rmse", m.rmse}, {"mae", m.mae}, {"r2", m.r2 ? Json(*m.r2) : Json(nullptr)}};
}

void write_manifest(const ExperimentConfig& config, std::string_view command, Json details) {
  Json j;
  j["tool"] = "lagcast";
  j["version"] = std::string(kVersion);
  j["command"] = std::string(command);
  j["config"] = config_json(config);
  j["results"] = std::move(details);
  io::write_text_file(config.resolved_output_dir() / "run_manifest.json", json_util::dump(j));
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

}  // namespace

std::vector<std::size_t> SweepRange::values() const {
  std::vector<std::size_t> out;
  for (std::size_t k = k_min; k <= k_max; k += step) out.push_back(k);
  return out;
}

lags::LagSpec ExperimentConfig::default_lag_spec() {
  lags::LagSpec s;
  s.channels = {Channel::Close};
  s.history_points = 100;
  s.include_current_covariates = true;
  s.covariates = lags::deep_history_covariates();
  return s;
}

void ExperimentConfig::validate() const {
  if (sweep.k_min < 1) throw ConfigError("sweep k_min must be >= 1");
  if (sweep.k_min > sweep.k_max) throw ConfigError(fmt::format("sweep k_min {} exceeds k_max {}", sweep.k_min, sweep.k_max));
  if (sweep.step < 1) throw ConfigError("sweep step must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError(fmt::format("train_fraction must lie strictly between 0 and 1 (got {})", train_fraction));
  if (date_from && date_to && *date_to < *date_from) throw ConfigError("date_to precedes date_from");
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (inputs[i].label == inputs[j].label) throw ConfigError(fmt::format("input label '{}' used twice", inputs[i].label));
  lasso.validate();
  lag_spec.validate();
}

void apply_preset(ExperimentConfig& config, std::string_view preset) {
  if (preset.empty()) return;
  if (preset != "deep-history") throw ConfigError(fmt::format("unknown preset '{}' (available: deep-history)", preset));
  config.preset = std::string(preset);
  config.lag_spec.channels = {Channel::Open, Channel::High, Channel::Low, Channel::Close};
  config.lag_spec.history_points = 100;
  config.lag_spec.include_current_covariates = true;
  config.lag_spec.covariates = lags::deep_history_covariates();
  config.sweep = {5, 405, 5};
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"inputs", "target", "date_from", "date_to", "channel", "log_returns", "lags", "lasso", "sweep", "train_fraction",
              "pca_scaling", "output_dir", "seed", "threads", "preset"},
             "config");

  auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };

  ExperimentConfig c;
  try {
    if (j.contains("preset") && !j["preset"].is_null()) apply_preset(c, j["preset"].get<std::string>());
    if (j.contains("inputs")) {
      for (const auto& in : j["inputs"]) {
        InputSpec s;
        if (in.is_string()) {
          s.path = resolve(in.get<std::string>());
          s.label = s.path.stem().string();
        } else {
          check_keys(in, {"path", "label"}, "inputs entry");
          s.path = resolve(in.at("path").get<std::string>());
          s.label = in.contains("label") ? in["label"].get<std::string>() : s.path.stem().string();
        }
        c.inputs.push_back(std::move(s));
      }
    }
    if (j.contains("target")) c.target = j["target"].get<std::string>();
    if (j.contains("date_from") && !j["date_from"].is_null()) c.date_from = parse_date(j["date_from"].get<std::string>());
    if (j.contains("date_to") && !j["date_to"].is_null()) c.date_to = parse_date(j["date_to"].get<std::string>());
    if (j.contains("channel")) c.channel = parse_channel(j["channel"].get<std::string>());
    if (j.contains("log_returns")) c.log_returns = j["log_returns"].get<bool>();
    if (j.contains("lags")) {
      const auto& l = j["lags"];
      check_keys(l, {"channels", "history", "include_current_covariates", "covariates", "target", "node_count"}, "lags");
      if (l.contains("channels")) c.lag_spec.channels = parse_channels(l["channels"]);
      if (l.contains("history")) c.lag_spec.history_points = l["history"].get<std::size_t>();
      if (l.contains("include_current_covariates")) c.lag_spec.include_current_covariates = l["include_current_covariates"].get<bool>();
      if (l.contains("covariates")) {
        c.lag_spec.covariates.clear();
        for (const auto& cov : l["covariates"]) c.lag_spec.covariates.push_back(parse_covariate(cov));
      }
      if (l.contains("target")) c.lag_spec.target = parse_channel(l["target"].get<std::string>());
    }
    if (j.contains("lasso")) {
      const auto& l = j["lasso"];
      check_keys(l, {"lambda", "tolerance", "max_sweeps", "standardize"}, "lasso");
      if (l.contains("lambda") && !l["lambda"].is_null()) c.lasso.lambda = l["lambda"].get<double>();
      if (l.contains("tolerance")) c.lasso.tolerance = l["tolerance"].get<double>();
      if (l.contains("max_sweeps")) c.lasso.max_sweeps = l["max_sweeps"].get<std::size_t>();
      if (l.contains("standardize")) c.lasso.standardize_features = l["standardize"].get<bool>();
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      check_keys(s, {"k_min", "k_max", "step"}, "sweep");
      if (s.contains("k_min")) c.sweep.k_min = s["k_min"].get<std::size_t>();
      if (s.contains("k_max")) c.sweep.k_max = s["k_max"].get<std::size_t>();
      if (s.contains("step")) c.sweep.step = s["step"].get<std::size_t>();
    }
    if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("pca_scaling")) c.pca_scaling = pca::parse_scaling(j["pca_scaling"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_text_file(path), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& config) { return json_util::dump(config_json(config)); }

std::vector<SeriesFrame> load_inputs(const ExperimentConfig& config) {
  std::vector<SeriesFrame> frames;
  for (const auto& in : config.inputs) {
    if (!std::filesystem::exists(in.path)) throw InputError("input file not found: " + in.path.string());
    auto frame = load_ohlcv_csv(in.path, in.label);
    if (config.date_from || config.date_to) frame = frame.between(config.date_from, config.date_to);
    frames.push_back(std::move(frame));
  }
  return frames;
}

SeriesFrame load_target_frame(const ExperimentConfig& config) {
  if (config.inputs.empty()) throw ConfigError("no input files configured");
  ExperimentConfig one = config;
  if (config.target.empty()) {
    if (config.inputs.size() != 1) throw ConfigError("several inputs given; set the target label");
  } else {
    auto it = std::find_if(config.inputs.begin(), config.inputs.end(), [&](const InputSpec& s) { return s.label == config.target; });
    if (it == config.inputs.end()) throw ConfigError(fmt::format("target '{}' is not among the input labels", config.target));
    one.inputs = {*it};
  }
  one.inputs.resize(1);
  return load_inputs(one).front();
}

namespace {

AlignedPanel aligned_panel(const ExperimentConfig& config, const std::vector<SeriesFrame>& frames) {
  AlignedPanel panel = align_inner(frames, config.channel);
  if (config.log_returns) panel = panel.log_returns();
  return panel;
}

}  // namespace

CorrelationReport run_correlate(const ExperimentConfig& config, bool write) {
  config.validate();
  if (config.inputs.size() < 2) throw ConfigError("correlation analysis needs at least two instruments");
  CorrelationReport report;
  report.panel = aligned_panel(config, load_inputs(config));
  report.correlations = stats::correlation_matrix(report.panel);
  if (write) {
    const auto dir = config.resolved_output_dir();
    io::write_text_file(dir / "aligned_panel.csv", to_csv(report.panel));
    io::write_text_file(dir / "corr_matrix.csv", stats::to_csv(report.correlations));
    io::write_text_file(dir / "corr_heatmap.svg", stats::to_svg(report.correlations, "Effective correlation"));
    Json details;
    details["rows"] = report.panel.rows();
    details["date_from"] = report.panel.dates.front().iso();
    details["date_to"] = report.panel.dates.back().iso();
    write_manifest(config, "correlate", std::move(details));
  }
  return report;
}

DesignMatrix run_lags(const ExperimentConfig& config, bool write) {
  config.validate();
  const SeriesFrame frame = load_target_frame(config);
  DesignMatrix x = lags::build_lag_matrix(frame, config.lag_spec);
  if (write) {
    io::write_text_file(config.resolved_output_dir() / "lag_matrix.csv", lags::to_csv(x));
    Json details;
    details["instrument"] = frame.instrument();
    details["rows"] = x.rows();
    details["node_count"] = x.cols();
    write_manifest(config, "lags", std::move(details));
  }
  return x;
}

InfluenceReport run_influence(const ExperimentConfig& config, bool write) {
  config.validate();
  if (config.inputs.size() < 2) throw ConfigError("influence analysis needs at least two instruments");
  if (config.target.empty()) throw ConfigError("influence analysis needs a target label");
  const auto frames = load_inputs(config);

  InfluenceReport report;
  report.panel = aligned_panel(config, frames);
  report.correlations = stats::correlation_matrix(report.panel);
  report.influence = lasso::influence_weights(report.panel, config.target, config.lasso);

  if (write) {
    const auto dir = config.resolved_output_dir();
    io::write_text_file(dir / "corr_matrix.csv", stats::to_csv(report.correlations));
    io::write_text_file(dir / "corr_heatmap.svg", stats::to_svg(report.correlations, "Effective correlation"));
    io::write_text_file(dir / "influence_weights.csv", lasso::weights_csv(report.influence.labels, report.influence.weights));

    const auto& fit = report.influence.fit;
    Json j;
    j["target"] = config.target;
    j["channel"] = std::string(channel_name(config.channel));
    j["transform"] = config.log_returns ? "log_returns" : "levels";
    j["date_from"] = report.panel.dates.front().iso();
    j["date_to"] = report.panel.dates.back().iso();
    j["rows"] = report.panel.rows();
    j["lambda_selected"] = report.influence.selection.has_value();
    j["fit"] = Json::parse(lasso::to_json(fit));
    const std::size_t t = report.panel.index_of(config.target);
    j["correlation_with_target"] = Json::object();
    for (std::size_t c = 0; c < report.panel.cols(); ++c)
      if (c != t) j["correlation_with_target"][report.panel.labels[c]] = report.correlations.values(t, c);
    io::write_text_file(dir / "influence_weights.json", json_util::dump(j));

    Json details;
    details["rows"] = report.panel.rows();
    details["date_from"] = report.panel.dates.front().iso();
    details["date_to"] = report.panel.dates.back().iso();
    details["lambda"] = fit.lambda;
    details["lambda_selected"] = report.influence.selection.has_value();
    details["standardized"] = config.lasso.standardize_features;
    details["converged"] = fit.converged;
    write_manifest(config, "influence", std::move(details));
  }
  return report;
}

ProfileReport run_feedback_profile(const ExperimentConfig& config, bool write) {
  config.validate();
  const SeriesFrame frame = load_target_frame(config);
  const std::size_t h = config.lag_spec.history_points;
  if (frame.size() <= h + 10)
    throw InputError(fmt::format("{}: feedback profile with history {} needs more than {} rows, series has {}", frame.instrument(), h,
                                 h + 10, frame.size()));

  ProfileReport report;
  lasso::LassoConfig cfg = config.lasso;
  if (!cfg.lambda) {
    const DesignMatrix x = lags::build_lag_matrix(frame, config.lag_spec);
    report.selection = lasso::select_lambda(x, x.target, cfg);
    cfg.lambda = report.selection->lambda;
  }
  report.profile = lags::feedback_profile(frame, config.lag_spec, cfg);
  report.rows = frame.size() - h;

  if (write) {
    const auto dir = config.resolved_output_dir();
    io::write_text_file(dir / "feedback_profile.csv", lags::to_csv(report.profile));
    io::write_text_file(dir / "feedback_profile.svg",
                        lags::to_svg(report.profile, fmt::format("{}: LASSO weight by lag", frame.instrument())));
    Json details;
    details["instrument"] = frame.instrument();
    details["rows"] = report.rows;
    details["lambda"] = report.profile.fit.lambda;
    details["lambda_selected"] = report.selection.has_value();
    details["standardized"] = cfg.standardize_features;
    details["converged"] = report.profile.fit.converged;
    details["positive_weights"] = report.profile.positive;
    details["negative_weights"] = report.profile.negative;
    details["zero_weights"] = report.profile.zero;
    write_manifest(config, "profile", std::move(details));
  }
  return report;
}

SweepResult pca_sweep(const DesignMatrix& lag_matrix, const SweepRange& range, double train_fraction, pca::Scaling scaling,
                      std::size_t threads) {
  lag_matrix.check_shape();
  if (lag_matrix.target.size() != lag_matrix.rows()) throw InputError("sweep needs a target value for every row");
  if (range.k_min < 1 || range.k_min > range.k_max || range.step < 1) throw ConfigError("invalid component range");
  if (range.k_max > lag_matrix.cols())
    throw ConfigError(fmt::format("sweep k_max {} exceeds the node count {}", range.k_max, lag_matrix.cols()));

  const auto split = chronological_split(lag_matrix, train_fraction);
  const DesignMatrix& train = split.first;
  const DesignMatrix& test = split.second;
  const auto ks = range.values();
  const std::size_t k_top = ks.back();

  SweepResult result;
  result.train_rows = train.rows();
  result.test_rows = test.rows();
  result.basis = pca::fit_pca(train, k_top, scaling);
  const auto evr = pca::explained_variance_ratio(result.basis);
  const DesignMatrix train_scores = pca::project(train, result.basis);
  const DesignMatrix test_scores = pca::project(test, result.basis);

  result.records.resize(ks.size());
  std::vector<std::vector<double>> test_predictions(ks.size());
  std::vector<std::exception_ptr> errors(ks.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < ks.size(); i = next++) {
      try {
        const std::size_t k = ks[i];
        DesignMatrix tr{train_scores.values.leading_columns(k), {}, train.dates, train.target};
        DesignMatrix te{test_scores.values.leading_columns(k), {}, test.dates, test.target};
        tr.labels.assign(train_scores.labels.begin(), train_scores.labels.begin() + static_cast<std::ptrdiff_t>(k));
        te.labels = tr.labels;
        const auto fit = regress::fit_ols(tr, tr.target);
        const auto train_pred = regress::predict(fit, tr);
        auto test_pred = regress::predict(fit, te);
        SweepRecord rec;
        rec.k = k;
        rec.train = regress::metrics(tr.target, train_pred, false);
        rec.test = regress::metrics(te.target, test_pred, false);
        rec.evr_sum = std::accumulate(evr.begin(), evr.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
        result.records[i] = rec;
        test_predictions[i] = std::move(test_pred);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = worker_count(threads, ks.size());
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.records.size(); ++i)
    if (result.records[i].test.mse < result.records[best].test.mse) best = i;
  result.chosen_k = result.records[best].k;
  result.test_dates = test.dates;
  result.test_actual = test.target;
  result.chosen_test_predictions = std::move(test_predictions[best]);
  return result;
}

SweepResult run_pca_sweep(const ExperimentConfig& config, bool write) {
  config.validate();
  const std::size_t nodes = lags::node_count(config.lag_spec);
  if (config.sweep.k_max > nodes)
    throw ConfigError(fmt::format("sweep k_max {} exceeds the node count {} of the lag specification", config.sweep.k_max, nodes));
  const SeriesFrame frame = load_target_frame(config);
  const DesignMatrix x = lags::build_lag_matrix(frame, config.lag_spec);
  SweepResult result = pca_sweep(x, config.sweep, config.train_fraction, config.pca_scaling, config.threads);

  if (write) {
    const auto dir = config.resolved_output_dir();
    io::write_text_file(dir / "sweep.csv", sweep_csv(result));
    io::write_text_file(dir / fmt::format("predictions_k{}.csv", result.chosen_k),
                        regress::predictions_csv(result.test_dates, result.test_actual, result.chosen_test_predictions));
    Json details;
    details["instrument"] = frame.instrument();
    details["node_count"] = nodes;
    details["lag_rows"] = x.rows();
    details["train_rows"] = result.train_rows;
    details["test_rows"] = result.test_rows;
    details["test_from"] = result.test_dates.front().iso();
    details["pca_scaling"] = std::string(pca::scaling_name(config.pca_scaling));
    details["basis_fingerprint"] = fmt::format("{:016x}", pca::fingerprint(result.basis));
    details["chosen_k"] = result.chosen_k;
    for (const auto& r : result.records)
      if (r.k == result.chosen_k) {
        details["chosen_train"] = metrics_json(r.train);
        details["chosen_test"] = metrics_json(r.test);
      }
    write_manifest(config, "sweep", std::move(details));
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "k,train_mse,test_mse,train_r2,test_r2,evr_sum\n";
  auto r2 = [](const regress::MetricsReport& m) { return m.r2 ? io::fixed6(*m.r2) : std::string("nan"); };
  for (const auto& r : result.records)
    out += fmt::format("{},{},{},{},{},{}\n", r.k, io::fixed6(r.train.mse), io::fixed6(r.test.mse), r2(r.train), r2(r.test),
                       io::fixed6(r.evr_sum));
  return out;
}

}  // namespace lagcast::pipeline
