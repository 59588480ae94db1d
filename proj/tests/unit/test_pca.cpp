#include <doctest.h>

#include <json.hpp>

#include "lagcast/error.hpp"
#include "lagcast/pca.hpp"
#include "lagcast/stats.hpp"
#include "test_support.hpp"

using namespace lagcast;

namespace {

DesignMatrix design(const Matrix& m) {
  DesignMatrix d;
  d.values = m;
  for (std::size_t j = 0; j < m.cols(); ++j) d.labels.push_back("v" + std::to_string(j));
  return d;
}

// Correlated columns: random mixing of independent normals.
DesignMatrix mixed_design(std::size_t rows, std::size_t cols, test::Random& rng) {
  const auto z = test::random_design(rows, cols, rng);
  Matrix mix(cols, cols);
  for (double& v : mix.data()) v = rng.normal();
  return design(z.values * mix);
}

double residual_inf(const Matrix& s, const std::vector<double>& vec, double lambda) {
  double worst = 0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double sv = 0;
    for (std::size_t j = 0; j < s.cols(); ++j) sv += s(i, j) * vec[j];
    worst = std::max(worst, std::abs(sv - lambda * vec[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("pca") {
  TEST_CASE("covariance examples") {
    const auto same = pca::covariance_matrix(Matrix::from_rows({{1, 1}, {2, 2}, {4, 4}}));
    CHECK(same(0, 0) == doctest::Approx(same(0, 1)));
    CHECK(same(1, 1) == doctest::Approx(same(0, 1)));
    // Columns (1,-1,1,-1) and (1,1,-1,-1) are orthogonal and centered.
    const auto diag = pca::covariance_matrix(Matrix::from_rows({{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}));
    CHECK(diag(0, 1) == 0.0);
    CHECK(diag(0, 0) == doctest::Approx(4.0 / 3.0));
    const auto flat = pca::covariance_matrix(Matrix::from_rows({{1, 7}, {2, 7}, {5, 7}}));
    CHECK(flat(1, 1) == 0.0);
    CHECK(flat(0, 1) == 0.0);
    CHECK_THROWS_AS(pca::covariance_matrix(Matrix::from_rows({{1, 2}})), InputError);
  }

  TEST_CASE("covariance matches Eigen") {
    test::Random rng(1);
    const auto x = mixed_design(30, 6, rng);
    const auto s = pca::covariance_matrix(x.values);
    const Eigen::MatrixXd e = test::to_eigen(x.values);
    const Eigen::MatrixXd c = e.rowwise() - e.colwise().mean();
    const Eigen::MatrixXd oracle = c.transpose() * c / 29.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        CHECK(std::abs(s(i, j) - oracle(i, j)) < 1e-12);
        CHECK(s(i, j) == s(j, i));
      }
  }

  TEST_CASE("eigen examples") {
    const auto d = pca::symmetric_eigen(Matrix::from_rows({{2, 0}, {0, 1}}));
    CHECK(d.values == std::vector<double>{2, 1});
    CHECK(d.vectors == Matrix::identity(2));

    const auto e = pca::symmetric_eigen(Matrix::from_rows({{2, 1}, {1, 2}}));
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(std::abs(e.vectors(0, 0)) - std::sqrt(0.5)) < 1e-12);

    const auto id = pca::symmetric_eigen(Matrix::identity(4));
    for (double v : id.values) CHECK(v == 1.0);

    CHECK_THROWS_AS(pca::symmetric_eigen(Matrix::from_rows({{1, 2}, {0, 1}})), InputError);
    CHECK_THROWS_AS(pca::symmetric_eigen(Matrix(2, 3)), InputError);
  }

  TEST_CASE("eigen matches Eigen's self-adjoint solver") {
    test::Random rng(9);
    for (std::size_t p : {3u, 10u, 40u}) {
      const auto x = mixed_design(3 * p, p, rng);
      const auto s = pca::covariance_matrix(x.values);
      const auto mine = pca::symmetric_eigen(s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(test::to_eigen(s));
      const auto& ev = oracle.eigenvalues();  // ascending
      for (std::size_t i = 0; i < p; ++i) {
        CHECK(std::abs(mine.values[i] - ev(static_cast<Eigen::Index>(p - 1 - i))) < 1e-9 * std::max(1.0, ev.maxCoeff()));
        CHECK(residual_inf(s, mine.vectors.column(i), mine.values[i]) < 1e-6);
        // Sign rule: largest-magnitude entry is positive.
        const auto v = mine.vectors.column(i);
        const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        CHECK(*big > 0);
      }
      const Eigen::MatrixXd v = test::to_eigen(mine.vectors);
      CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-10);
      for (std::size_t i = 1; i < p; ++i) CHECK(mine.values[i] <= mine.values[i - 1]);
    }
  }

  TEST_CASE("rank-1 data is fully explained by one component") {
    const auto x = design(Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {5, 5}}));
    const auto basis = pca::fit_pca(x, 1);
    const auto evr = pca::explained_variance_ratio(basis);
    REQUIRE(evr.size() == 1);
    CHECK(evr[0] == doctest::Approx(1.0));
  }

  TEST_CASE("explained variance examples") {
    pca::PcaBasis b;
    b.eigenvalues = {2, 1, 1};
    b.k = 3;
    CHECK(pca::explained_variance_ratio(b) == std::vector<double>{0.5, 0.25, 0.25});
    b.eigenvalues = {2, 1};
    b.k = 1;
    CHECK(pca::explained_variance_ratio(b)[0] == doctest::Approx(2.0 / 3.0));
    b.eigenvalues = {0, 0};
    CHECK_THROWS_AS(pca::explained_variance_ratio(b), DegenerateError);

    test::Random rng(6);
    const auto x = test::random_design(6, 4, rng);
    const auto full = pca::fit_pca(x, 4);
    double sum = 0;
    for (double v : pca::explained_variance_ratio(full)) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-10);
  }

  TEST_CASE("diag(2,1) covariance gives ratio 2/3 for k = 1") {
    // Rows chosen so that the sample covariance is exactly diag(2, 1).
    const double a = std::sqrt(3.0), b = std::sqrt(1.5);
    const auto x = design(Matrix::from_rows({{a, 0}, {-a, 0}, {0, b}, {0, -b}}));
    const auto s = pca::covariance_matrix(x.values);
    CHECK(s(0, 0) == doctest::Approx(2.0));
    CHECK(s(1, 1) == doctest::Approx(1.0));
    CHECK(pca::explained_variance_ratio(pca::fit_pca(x, 1))[0] == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("projection properties") {
    test::Random rng(14);
    const auto x = mixed_design(50, 7, rng);
    const auto basis = pca::fit_pca(x, 7);
    const auto scores = pca::project(x, basis);
    CHECK(scores.labels.front() == "PC1");
    CHECK(scores.labels.back() == "PC7");
    const auto cov = pca::covariance_matrix(scores.values);
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(std::abs(mean(scores.values.column(i))) < 1e-8);
      CHECK(std::abs(cov(i, i) - basis.eigenvalues[i]) < 1e-8 * std::max(1.0, basis.eigenvalues[0]));
      for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(cov(i, j)) < 1e-8 * std::max(1.0, basis.eigenvalues[0]));
    }
    const auto back = pca::reconstruct(scores.values, basis);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < 7; ++j) CHECK(std::abs(back(i, j) - x.values(i, j)) < 1e-8);

    DesignMatrix center_row;
    center_row.values = Matrix(1, 7);
    for (std::size_t j = 0; j < 7; ++j) center_row.values(0, j) = basis.center[j];
    center_row.labels = x.labels;
    const auto projected = pca::project(center_row, basis);
    for (double v : projected.values.row(0)) CHECK(std::abs(v) < 1e-12);

    double trace = 0, total = 0;
    const auto s = pca::covariance_matrix(x.values);
    for (std::size_t i = 0; i < 7; ++i) trace += s(i, i), total += basis.eigenvalues[i];
    CHECK(std::abs(trace - total) < 1e-8);

    CHECK_THROWS_AS(pca::project(test::random_design(3, 6, rng), basis), InputError);
    CHECK_THROWS_AS(pca::fit_pca(x, 0), InputError);
    CHECK_THROWS_AS(pca::fit_pca(x, 8), InputError);
  }

  TEST_CASE("reconstruction error is nonincreasing in k") {
    test::Random rng(15);
    const auto x = mixed_design(40, 8, rng);
    const auto full = pca::fit_pca(x, 8);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 8; ++k) {
      const auto b = pca::truncate(full, k);
      const auto back = pca::reconstruct(pca::project(x, b).values, b);
      double err = 0;
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < 8; ++j) err += std::pow(back(i, j) - x.values(i, j), 2);
      CHECK(err <= previous + 1e-9);
      previous = err;
    }
    CHECK_THROWS_AS(pca::truncate(full, 9), InputError);
  }

  TEST_CASE("correlation scaling equals covariance PCA of standardized data") {
    test::Random rng(16);
    auto x = mixed_design(40, 4, rng);
    for (std::size_t i = 0; i < x.rows(); ++i) x.values(i, 0) *= 1000;
    const auto corr = pca::fit_pca(x, 4, pca::Scaling::Correlation);
    const auto [z, params] = stats::standardize(x);
    const auto cov = pca::fit_pca(z, 4);
    REQUIRE(corr.scale);
    for (std::size_t i = 0; i < 4; ++i) CHECK(corr.eigenvalues[i] == doctest::Approx(cov.eigenvalues[i]).epsilon(1e-10));
    const auto a = pca::project(x, corr), b = pca::project(z, cov);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(a.values(i, j) - b.values(i, j)) < 1e-9);
  }

  TEST_CASE("fingerprint and JSON") {
    test::Random rng(18);
    const auto x = mixed_design(20, 3, rng);
    const auto a = pca::fit_pca(x, 2), b = pca::fit_pca(x, 2);
    CHECK(pca::fingerprint(a) == pca::fingerprint(b));
    CHECK(pca::fingerprint(a) != pca::fingerprint(pca::fit_pca(x, 3)));
    const auto j = nlohmann::json::parse(pca::to_json(a));
    CHECK(j["k"] == 2);
    CHECK(j["center"].size() == 3);
    CHECK(j["components"].size() == 6);  // row-major p x k
    CHECK(j["eigenvalues"].size() == 3);
  }
}
