#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/lagfeatures.hpp"
#include "lagcast/lasso.hpp"
#include "lagcast/pca.hpp"
#include "lagcast/regress.hpp"
#include "lagcast/stats.hpp"
#include "lagcast/timeseries.hpp"

namespace lagcast::pipeline {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kDefaultOutputDir = "lagcast_out";

struct InputSpec {
  std::filesystem::path path;
  std::string label;
};

struct SweepRange {
  std::size_t k_min = 5;
  std::size_t k_max = 105;
  std::size_t step = 5;

  /// k_min, k_min + step, ... up to k_max inclusive.
  std::vector<std::size_t> values() const;
};

/// Everything one experiment needs. Defaults reproduce the close-price
/// history study: 100 close lags plus five basic characteristics (105 nodes),
/// swept over 5..105 components in steps of 5 with a chronological 80/20 split.
struct ExperimentConfig {
  std::vector<InputSpec> inputs;
  /// Instrument predicted (influence target; frame used for lags). Empty means
  /// the single input when there is exactly one.
  std::string target;
  std::optional<Date> date_from;
  std::optional<Date> date_to;
  /// Price field used by the influence study.
  Channel channel = Channel::Close;
  /// Influence study on log returns instead of levels.
  bool log_returns = false;
  lags::LagSpec lag_spec = default_lag_spec();
  lasso::LassoConfig lasso;
  SweepRange sweep;
  double train_fraction = 0.8;
  pca::Scaling pca_scaling = pca::Scaling::Covariance;
  /// Empty means kDefaultOutputDir.
  std::filesystem::path output_dir;
  /// Recorded in the manifest; the pipeline itself draws no random numbers.
  std::uint64_t seed = 0;
  /// Worker threads for the component sweep; 0 = hardware concurrency.
  std::size_t threads = 0;
  std::string preset;

  static lags::LagSpec default_lag_spec();

  std::filesystem::path resolved_output_dir() const {
    return output_dir.empty() ? std::filesystem::path(kDefaultOutputDir) : output_dir;
  }

  /// Throws ConfigError.
  void validate() const;
};

/// "deep-history": lags of open/high/low/close (4 x 100) plus the five basic
/// characteristics = 405 nodes, swept over 5..405 step 5.
void apply_preset(ExperimentConfig& config, std::string_view preset);

/// Parses the JSON config document. Relative input paths and output_dir are
/// resolved against `base_dir`. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON echo (the form stored in run_manifest.json).
std::string config_to_json(const ExperimentConfig& config);

struct CorrelationReport {
  stats::CorrMatrix correlations;
  AlignedPanel panel;
};

/// Aligns every input on the configured channel (optionally as log returns)
/// and writes aligned_panel.csv, corr_matrix.csv, corr_heatmap.svg and
/// run_manifest.json when `write` is set.
CorrelationReport run_correlate(const ExperimentConfig& config, bool write = true);

/// Lag matrix of the target instrument; writes lag_matrix.csv and
/// run_manifest.json when `write` is set.
DesignMatrix run_lags(const ExperimentConfig& config, bool write = true);

struct InfluenceReport {
  stats::CorrMatrix correlations;
  lasso::InfluenceWeights influence;
  AlignedPanel panel;
};

/// Correlation heat map plus LASSO influence weights of every other
/// instrument on the target. Writes corr_matrix.csv, corr_heatmap.svg,
/// influence_weights.csv, influence_weights.json and run_manifest.json when
/// `write` is set.
InfluenceReport run_influence(const ExperimentConfig& config, bool write = true);

struct ProfileReport {
  lags::FeedbackProfile profile;
  std::size_t rows = 0;
  std::optional<lasso::LambdaSelection> selection;
};

/// Per-lag LASSO weights of the target instrument (feedback_profile.csv/.svg).
/// Requires more than H + 10 rows.
ProfileReport run_feedback_profile(const ExperimentConfig& config, bool write = true);

struct SweepRecord {
  std::size_t k = 0;
  regress::MetricsReport train;
  regress::MetricsReport test;
  double evr_sum = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::size_t chosen_k = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  pca::PcaBasis basis;  // training-only basis with the largest swept k
  std::vector<Date> test_dates;
  std::vector<double> test_actual;
  std::vector<double> chosen_test_predictions;
};

/// The sweep on an explicit lag matrix (target carried in `lag_matrix.target`):
/// chronological split, PCA on training rows only, OLS on projected training
/// scores, metrics on both partitions. Chosen k minimizes test MSE (ties to
/// the smaller k). Per-k runs execute on `threads` workers.
SweepResult pca_sweep(const DesignMatrix& lag_matrix, const SweepRange& range, double train_fraction, pca::Scaling scaling,
                      std::size_t threads = 1);

/// Builds the lag matrix from the target instrument, then pca_sweep. Writes
/// sweep.csv, predictions_k<k>.csv and run_manifest.json when `write` is set.
/// Throws ConfigError when k_max exceeds the node count.
SweepResult run_pca_sweep(const ExperimentConfig& config, bool write = true);

/// "k,train_mse,test_mse,train_r2,test_r2,evr_sum", six decimals.
std::string sweep_csv(const SweepResult& result);

/// Loads every input, restricted to the configured date range.
std::vector<SeriesFrame> load_inputs(const ExperimentConfig& config);
/// The frame whose label is config.target (or the sole input).
SeriesFrame load_target_frame(const ExperimentConfig& config);

}  // namespace lagcast::pipeline
