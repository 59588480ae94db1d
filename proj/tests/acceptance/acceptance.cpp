// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails; a skipped criterion does not fail the run.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "cli.hpp"
#include "lagcast/error.hpp"
#include "lagcast/lagfeatures.hpp"
#include "lagcast/lasso.hpp"
#include "lagcast/pca.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/regress.hpp"
#include "lagcast/stats.hpp"
#include "lagcast/synthdata.hpp"
#include "test_support.hpp"

using namespace lagcast;

namespace {

// Pinned tolerances.
constexpr double kGridCoefTol = 1e-3;
constexpr double kGridResolution = 1e-5;
constexpr double kGridSeconds = 10.0;
constexpr double kKktTol = 1e-6;
constexpr double kBudgetTol = 1e-8;
constexpr double kOlsAgreeTol = 1e-6;
constexpr double kEigenResidualTol = 1e-6;
constexpr double kReconstructTol = 1e-8;
constexpr double kEvrSumTol = 1e-10;
constexpr double kScoreVarTol = 1e-8;
constexpr double kJacobiSeconds = 60.0;
constexpr double kLatentMseSlack = 0.05;
constexpr std::size_t kLatentMaxK = 5;
constexpr double kAr1Low = 0.85, kAr1High = 0.95;
constexpr int kSignTrials = 100, kSignRequired = 95;
constexpr double kScaleInvarianceTol = 1e-10;
constexpr double kPsdTol = 1e-8;
constexpr double kSoftCorrTol = 0.05;

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

lasso::LassoConfig with_lambda(double lambda) {
  lasso::LassoConfig cfg;
  cfg.lambda = lambda;
  return cfg;
}

lags::LagSpec close_only(std::size_t h) {
  lags::LagSpec s;
  s.channels = {Channel::Close};
  s.history_points = h;
  s.include_current_covariates = false;
  return s;
}

SeriesFrame generated_frame(synth::GeneratorSpec spec) { return std::get<SeriesFrame>(synth::generate(spec)); }

Outcome lasso_grid_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  test::Random rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = rng.index(1, 2);
    const auto x = test::random_design(rng.index(4, 30), p, rng);
    const auto y = test::random_target(x, rng);
    const double lambda = rng.uniform(0.0, 1.0) * lasso::lambda_max(x, y);
    const auto fit = lasso::fit_lasso(x, y, with_lambda(lambda));
    const auto grid = test::lasso_grid_oracle(x, y, lambda, 20.0, kGridResolution);
    for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(fit.coefficients[j] - grid[j]));
  }
  const double secs = seconds_since(t0);
  return verdict(worst < kGridCoefTol && secs < kGridSeconds,
                 fmt::format("max |coef - grid| {:.2e} over 50 instances (< {:.0e}); {:.2f} s (< {:.0f} s)", worst,
                             kGridCoefTol, secs, kGridSeconds));
}

Outcome lasso_subgradient() {
  test::Random rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = rng.index(1, 10);
    const auto x = test::random_design(rng.index(p + 2, 60), p, rng);
    const auto y = test::random_target(x, rng);
    const auto fit = lasso::fit_lasso(x, y, with_lambda(rng.uniform(0.0, 1.0) * lasso::lambda_max(x, y)));
    std::vector<double> r(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      r[i] = y[i] - fit.intercept;
      for (std::size_t j = 0; j < p; ++j) r[i] -= fit.coefficients[j] * x.values(i, j);
    }
    for (std::size_t j = 0; j < p; ++j) {
      const auto col = x.values.column(j);
      const double m = mean(col);
      double g = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) g += 2.0 * (col[i] - m) * r[i];
      const double b = fit.coefficients[j];
      worst = std::max(worst, b == 0.0 ? std::max(0.0, std::abs(g) - fit.lambda) : std::abs(g - fit.lambda * (b > 0 ? 1 : -1)));
    }
  }
  return verdict(worst < kKktTol, fmt::format("max stationarity violation {:.2e} over 20 instances (< {:.0e})", worst, kKktTol));
}

Outcome lambda_path() {
  test::Random rng(1003);
  bool zero_ok = true;
  double worst_increase = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = test::random_design(rng.index(10, 60), rng.index(1, 10), rng);
    const auto y = test::random_target(x, rng);
    const double lm = lasso::lambda_max(x, y);
    for (double b : lasso::fit_lasso(x, y, with_lambda(lm)).coefficients) zero_ok = zero_ok && b == 0.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      const double budget = lasso::fit_lasso(x, y, with_lambda(lm * k / 19.0)).budget;
      worst_increase = std::max(worst_increase, budget - previous);
      previous = budget;
    }
  }
  return verdict(zero_ok && worst_increase <= kBudgetTol,
                 fmt::format("fit at lambda_max all zero: {}; largest budget increase along 20-point grid {:.2e} (<= {:.0e})",
                             zero_ok ? "yes" : "no", std::max(0.0, worst_increase), kBudgetTol));
}

Outcome lambda_zero_vs_ols() {
  test::Random rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = rng.index(1, 10);
    const auto x = test::random_design(rng.index(p + 5, 80), p, rng);
    const auto y = test::random_target(x, rng);
    const auto fit = lasso::fit_lasso(x, y, with_lambda(0.0));
    const auto ols = regress::fit_ols(x, y);
    worst = std::max(worst, std::abs(fit.intercept - ols.intercept));
    for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(fit.coefficients[j] - ols.coefficients[j]));
  }
  return verdict(worst < kOlsAgreeTol, fmt::format("max |lasso(0) - ols| {:.2e} over 20 instances (< {:.0e})", worst, kOlsAgreeTol));
}

Outcome pca_correctness() {
  test::Random rng(1005);
  double residual = 0, recon = 0, evr = 0, scorevar = 0, jacobi_secs = 0;
  for (std::size_t p : {2u, 7u, 40u, 120u, 405u}) {
    auto x = test::random_design(p + 20, p, rng);
    // Mild correlation between neighbouring columns.
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 1; j < p; ++j) x.values(i, j) += 0.5 * x.values(i, j - 1);
    const auto s = pca::covariance_matrix(x.values);
    const auto t0 = std::chrono::steady_clock::now();
    const auto eig = pca::symmetric_eigen(s);
    if (p == 405) jacobi_secs = seconds_since(t0);
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t i = 0; i < p; ++i) {
        double sv = 0;
        for (std::size_t j = 0; j < p; ++j) sv += s(i, j) * eig.vectors(j, k);
        residual = std::max(residual, std::abs(sv - eig.values[k] * eig.vectors(i, k)));
      }
    }
    const auto basis = pca::fit_pca(x, p);
    const auto scores = pca::project(x, basis);
    const auto back = pca::reconstruct(scores.values, basis);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < p; ++j) recon = std::max(recon, std::abs(back(i, j) - x.values(i, j)));
    double sum = 0;
    for (double v : pca::explained_variance_ratio(basis)) sum += v;
    evr = std::max(evr, std::abs(sum - 1.0));
    for (std::size_t k = 0; k < p; ++k)
      scorevar = std::max(scorevar, std::abs(stats::sample_variance(scores.values.column(k)) - basis.eigenvalues[k]));
  }
  const bool ok = residual < kEigenResidualTol && recon < kReconstructTol && evr < kEvrSumTol && scorevar < kScoreVarTol &&
                  jacobi_secs < kJacobiSeconds;
  return verdict(ok, fmt::format("eigen residual {:.1e}, reconstruction {:.1e}, |sum evr - 1| {:.1e}, score variance {:.1e}; "
                                 "405x405 Jacobi {:.2f} s (< {:.0f} s)",
                                 residual, recon, evr, scorevar, jacobi_secs, kJacobiSeconds));
}

Outcome latent_sweep() {
  synth::GeneratorSpec spec;
  spec.kind = synth::Kind::LatentFactor;
  spec.factor_count = 3;
  spec.noise_scale = 0.05;
  spec.length = 1500;
  spec.seed = 1006;
  test::TempDir dir;
  test::write_file(dir / "latent.csv", to_csv(generated_frame(spec)));
  pipeline::ExperimentConfig c;
  c.inputs = {{dir / "latent.csv", "latent"}};
  c.lag_spec = close_only(20);
  c.sweep = {1, 20, 1};
  c.output_dir = dir / "out";
  const auto r = pipeline::run_pca_sweep(c, false);
  double best = std::numeric_limits<double>::infinity(), at3 = 0;
  for (const auto& rec : r.records) {
    best = std::min(best, rec.test.mse);
    if (rec.k == 3) at3 = rec.test.mse;
  }
  const bool ok = at3 <= best * (1 + kLatentMseSlack) && r.chosen_k <= kLatentMaxK;
  return verdict(ok, fmt::format("test mse at k=3 {:.6f} vs minimum {:.6f} (within {:.0f}%); chosen k {} (<= {})", at3, best,
                                 100 * kLatentMseSlack, r.chosen_k, kLatentMaxK));
}

Outcome feedback_recovery() {
  synth::GeneratorSpec ar1;
  ar1.kind = synth::Kind::ArProcess;
  ar1.ar_coefficients = {0.9};
  ar1.length = 5000;
  ar1.seed = 1007;
  const auto p1 = lags::feedback_profile(generated_frame(ar1), close_only(10), {});
  const double lag1 = p1.entries.at(0).weight;

  int correct = 0;
  for (int trial = 0; trial < kSignTrials; ++trial) {
    synth::GeneratorSpec ar2;
    ar2.kind = synth::Kind::ArProcess;
    ar2.ar_coefficients = {0.5, -0.3};
    ar2.length = 2000;
    ar2.seed = 2000 + static_cast<std::uint64_t>(trial);
    const auto p2 = lags::feedback_profile(generated_frame(ar2), close_only(5), {});
    correct += p2.entries.at(0).weight > 0 && p2.entries.at(1).weight < 0;
  }
  const bool ok = lag1 >= kAr1Low && lag1 <= kAr1High && correct >= kSignRequired;
  return verdict(ok, fmt::format("AR(1) lag-1 weight {:.4f} (in [{}, {}]); two-lag signs recovered in {}/{} trials (>= {})", lag1,
                                 kAr1Low, kAr1High, correct, kSignTrials, kSignRequired));
}

Outcome anti_leakage() {
  synth::GeneratorSpec spec;
  spec.kind = synth::Kind::ArProcess;
  spec.ar_coefficients = {0.8};
  spec.length = 260;
  spec.seed = 1008;
  const auto frame = generated_frame(spec);
  std::map<Date, const Bar*> by_date;
  for (const auto& b : frame.rows()) by_date[b.date] = &b;

  lags::LagSpec deep;
  deep.channels = {Channel::Open, Channel::High, Channel::Low, Channel::Close};
  deep.history_points = 100;
  deep.include_current_covariates = true;
  deep.covariates = lags::deep_history_covariates();
  std::vector<lags::LagSpec> specs{close_only(1), close_only(30), deep};

  std::size_t cells = 0, bad = 0;
  for (const auto& s : specs) {
    const auto m = lags::build_lag_matrix(frame, s);
    const auto rows = frame.rows();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const Date d = m.dates[r];
      const std::size_t t = static_cast<std::size_t>(
          std::distance(rows.begin(), std::find_if(rows.begin(), rows.end(), [&](const Bar& b) { return b.date == d; })));
      if (m.target[r] != by_date.at(d)->get(s.target)) ++bad;
      std::size_t col = 0;
      for (Channel c : s.channels)
        for (std::size_t k = 1; k <= s.history_points; ++k, ++col, ++cells)
          if (!(rows[t - k].date < d) || m.values(r, col) != rows[t - k].get(c)) ++bad;
      if (s.include_current_covariates)
        for (const auto& cov : s.covariates) {
          ++cells;
          const bool same_day_target = cov.lag == 0 && cov.channel == s.target;
          if (same_day_target || rows[t - cov.lag].date > d || m.values(r, col) != rows[t - cov.lag].get(cov.channel)) ++bad;
          ++col;
        }
    }
  }

  const auto x = lags::build_lag_matrix(frame, close_only(10));
  const auto [train, test_part] = chronological_split(x, 0.8);
  const auto basis = pca::fit_pca(train, 10);
  const auto before = pca::fingerprint(basis);
  pca::project(x, basis);  // training rows with the test rows appended
  const bool hash_stable = pca::fingerprint(basis) == before;
  const bool refit_differs = pca::fingerprint(pca::fit_pca(x, 10)) != before;
  const auto sweep = pipeline::pca_sweep(x, {2, 10, 4}, 0.8, pca::Scaling::Covariance);
  const bool sweep_uses_train = pca::fingerprint(sweep.basis) == before;

  return verdict(bad == 0 && hash_stable && refit_differs && sweep_uses_train,
                 fmt::format("{} feature cells audited, {} violations; basis hash unchanged by projecting appended test rows: {}; "
                             "sweep basis equals training-only basis: {}",
                             cells, bad, hash_stable ? "yes" : "no", sweep_uses_train ? "yes" : "no"));
}

Outcome correlation_properties() {
  test::Random rng(1009);
  double asym = 0, diag = 0, range = 0, scale = 0, min_eig = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = rng.index(2, 8), n = rng.index(10, 200);
    AlignedPanel p;
    for (std::size_t i = 0; i < n; ++i) p.dates.push_back(Date::from_ymd(2000, 1, 1).plus_days(static_cast<long long>(i)));
    for (std::size_t c = 0; c < m; ++c) p.labels.push_back("c" + std::to_string(c));
    p.columns.assign(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double common = rng.normal();
      for (std::size_t c = 0; c < m; ++c) p.columns[c][i] = 100 + 10 * (common * rng.uniform(-1, 1) + rng.normal());
    }
    const auto corr = stats::correlation_matrix(p);
    AlignedPanel z = p;
    for (auto& col : z.columns) {
      const double mu = mean(col), sd = stats::sample_sd(col);
      for (double& v : col) v = (v - mu) / sd;
    }
    const auto corr_z = stats::correlation_matrix(z);
    for (std::size_t i = 0; i < m; ++i) {
      diag = std::max(diag, std::abs(corr.values(i, i) - 1.0));
      for (std::size_t j = 0; j < m; ++j) {
        asym = std::max(asym, std::abs(corr.values(i, j) - corr.values(j, i)));
        range = std::max(range, std::abs(corr.values(i, j)) - 1.0);
        scale = std::max(scale, std::abs(corr.values(i, j) - corr_z.values(i, j)));
      }
    }
    min_eig = std::min(min_eig, pca::symmetric_eigen(corr.values).values.back());
  }
  const bool ok = asym == 0 && diag == 0 && range <= 0 && scale < kScaleInvarianceTol && min_eig > -kPsdTol;
  return verdict(ok, fmt::format("50 panels: max asymmetry {:.1e}, max |diag - 1| {:.1e}, max |r| - 1 {:.1e}, "
                                 "scale invariance {:.1e} (< {:.0e}), min eigenvalue {:.1e} (> -{:.0e})",
                                 asym, diag, range, scale, kScaleInvarianceTol, min_eig, kPsdTol));
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).string()] = test::read_file(e.path());
  return files;
}

Outcome determinism() {
  test::TempDir dir;
  const std::string d = dir.path().string();
  auto cli_run = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  const std::string in = d + "/in", x = in + "/x.csv", y = in + "/y.csv", z = in + "/z.csv";
  const std::vector<std::vector<std::string>> commands{
      {"generate", "--kind", "ar", "--phi", "0.9", "--n", "500", "--seed", "7", "--out", d + "/gen_ar", "-q"},
      {"generate", "--kind", "corr", "--corr", "1,0.9,0.5;0.9,1,0.4;0.5,0.4,1", "--labels", "x,y,z", "--n", "700", "--seed", "3",
       "--out", in, "-q"},
      {"correlate", x, y, z, "--out", d + "/correlate", "-q"},
      {"influence", x, y, z, "--target", "x", "--out", d + "/influence", "-q"},
      {"lags", x, "--history", "20", "--out", d + "/lags", "-q"},
      {"profile", x, "--history", "20", "--no-covariates", "--out", d + "/profile", "-q"},
      {"sweep", x, "--history", "30", "--kmin", "5", "--kmax", "35", "--step", "5", "--threads", "4", "--out", d + "/sweep",
       "-q"},
  };
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& cmd : commands) {
    if (cli_run(cmd) != 0) return verdict(false, "subcommand failed: " + cmd.front());
    const std::string out_dir = cmd[std::distance(cmd.begin(), std::find(cmd.begin(), cmd.end(), "--out")) + 1];
    const auto first = snapshot(out_dir);
    if (cli_run(cmd) != 0) return verdict(false, "second run failed: " + cmd.front());
    const auto second = snapshot(out_dir);
    compared += first.size();
    if (first != second) differing.push_back(cmd.front());
  }
  std::string list;
  for (const auto& s : differing) list += " " + s;
  return verdict(differing.empty(), fmt::format("7 invocations over all 6 subcommands, {} output files byte-compared{}", compared,
                                                differing.empty() ? "" : "; differing:" + list));
}

Outcome soft_reproduction() {
  const char* root = std::getenv("LAGCAST_MARKET_DATA");
  if (!root || !*root)
    return {Status::Skip,
            "set LAGCAST_MARKET_DATA to a directory holding nasdaq.csv, dollar.csv, gold.csv and oil.csv "
            "(daily OHLCV, 2014-12-12 to 2022-11-21) to run this optional check"};
  const std::filesystem::path dir(root);
  pipeline::ExperimentConfig c;
  for (const char* name : {"nasdaq", "dollar", "gold", "oil"}) c.inputs.push_back({dir / (std::string(name) + ".csv"), name});
  c.target = "nasdaq";
  c.date_from = Date::from_ymd(2014, 12, 12);
  c.date_to = Date::from_ymd(2022, 11, 21);
  const auto r = pipeline::run_influence(c, false);
  const auto& corr = r.correlations;
  auto at = [&](const std::string& a, const std::string& b) {
    const auto ia = std::find(corr.labels.begin(), corr.labels.end(), a) - corr.labels.begin();
    const auto ib = std::find(corr.labels.begin(), corr.labels.end(), b) - corr.labels.begin();
    return corr.values(static_cast<std::size_t>(ia), static_cast<std::size_t>(ib));
  };
  auto weight = [&](const std::string& label) {
    const auto i = std::find(r.influence.labels.begin(), r.influence.labels.end(), label) - r.influence.labels.begin();
    return r.influence.weights[static_cast<std::size_t>(i)];
  };
  const double cd = at("nasdaq", "dollar"), cg = at("nasdaq", "gold"), co = at("nasdaq", "oil");
  const double wd = weight("dollar"), wo = weight("oil"), wg = weight("gold");
  const bool ok = std::abs(cd - 0.96) <= kSoftCorrTol && std::abs(cg - 0.91) <= kSoftCorrTol &&
                  std::abs(co - 0.57) <= kSoftCorrTol && wd > wo && wo > wg;
  return verdict(ok, fmt::format("corr dollar/gold/oil {:.3f}/{:.3f}/{:.3f} vs 0.96/0.91/0.57 (+-{}); weights dollar {:.3f} "
                                 "oil {:.3f} gold {:.3f}",
                                 cd, cg, co, kSoftCorrTol, wd, wo, wg));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"LASSO matches dense grid minimization", lasso_grid_oracle},
      {"LASSO subgradient optimality", lasso_subgradient},
      {"lambda path sanity", lambda_path},
      {"lambda = 0 agrees with OLS", lambda_zero_vs_ols},
      {"PCA correctness and 405x405 runtime", pca_correctness},
      {"latent-factor sweep oracle", latent_sweep},
      {"feedback-profile recovery", feedback_recovery},
      {"anti-leakage audit", anti_leakage},
      {"correlation matrix properties", correlation_properties},
      {"byte-identical reruns", determinism},
      {"soft reproduction on user data", soft_reproduction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("threw: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failed += o.status == Status::Fail;
    std::cout << fmt::format("{} [{:>2}] {}: {}", tag, i + 1, criteria[i].first, o.detail) << std::endl;
  }
  std::cout << (failed ? fmt::format("{} criterion(s) failed", failed) : std::string("all required criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
