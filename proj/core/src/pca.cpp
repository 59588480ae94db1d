#include "lagcast/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <fmt/format.h>

#include "json_util.hpp"
#include "lagcast/error.hpp"

namespace lagcast::pca {
namespace {

constexpr std::size_t kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

void fnv(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void fnv(std::uint64_t& h, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    fnv(h, &bits, sizeof bits);
  }
}

}  // namespace

std::string_view scaling_name(Scaling s) noexcept {
  return s == Scaling::Covariance ? "covariance" : "correlation";
}

Scaling parse_scaling(std::string_view name) {
  if (name == "covariance") return Scaling::Covariance;
  if (name == "correlation") return Scaling::Correlation;
  throw ConfigError(fmt::format("unknown PCA scaling '{}' (expected covariance or correlation)", name));
}

Matrix covariance_matrix(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2) throw InputError(fmt::format("covariance needs at least 2 rows, got {}", n));
  std::vector<double> means(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) means[c] += x(r, c);
  for (double& m : means) m /= static_cast<double>(n);

  Matrix centered(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) centered(r, c) = x(r, c) - means[c];

  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = centered.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = row[i];
      if (xi == 0.0) continue;
      auto out = cov.row(i);
      for (std::size_t j = i; j < p; ++j) out[j] += xi * row[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  return cov;
}

EigenDecomposition symmetric_eigen(const Matrix& s) {
  if (s.rows() != s.cols()) throw InputError(fmt::format("eigendecomposition needs a square matrix, got {}x{}", s.rows(), s.cols()));
  const std::size_t n = s.rows();
  double biggest = 0.0;
  for (double v : s.data()) biggest = std::max(biggest, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-8 * std::max(1.0, biggest))
        throw InputError(fmt::format("matrix is not symmetric at ({}, {}): {} vs {}", i, j, s(i, j), s(j, i)));

  Matrix a = s;
  // Symmetrize exactly so the rotations below can read rows instead of columns.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  // Rows of vt are the eigenvectors.
  Matrix vt = Matrix::identity(n);

  EigenDecomposition out;
  const double target = 1e-12 * frobenius(a);
  while (off_diagonal_norm(a) > target) {
    if (out.sweeps == kMaxSweeps)
      throw InvariantError(fmt::format("Jacobi did not converge in {} sweeps", kMaxSweeps));
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        auto row_p = a.row(p);
        auto row_q = a.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = row_p[r], h = row_q[r];
          const double gp = c * g - sn * h;
          const double hq = sn * g + c * h;
          row_p[r] = gp;
          row_q[r] = hq;
          a(r, p) = gp;
          a(r, q) = hq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          const double g = vp[r], h = vq[r];
          vp[r] = c * g - sn * h;
          vq[r] = sn * g + c * h;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    auto v = vt.row(order[k]);
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v[r]) > std::abs(v[arg])) arg = r;
    const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * v[r];
  }
  return out;
}

PcaBasis fit_pca(const DesignMatrix& x, std::size_t k, Scaling scaling) {
  x.check_shape();
  if (x.rows() < 2) throw InputError(fmt::format("PCA needs at least 2 rows, got {}", x.rows()));
  if (k < 1 || k > x.cols())
    throw InputError(fmt::format("component count {} outside [1, {}]", k, x.cols()));

  PcaBasis basis;
  basis.input_labels = x.labels;
  const std::size_t n = x.rows(), p = x.cols();
  basis.center.assign(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) basis.center[c] += x.values(r, c);
  for (double& m : basis.center) m /= static_cast<double>(n);

  Matrix work = x.values;
  if (scaling == Scaling::Correlation) {
    std::vector<double> sd(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
      double ss = 0.0;
      bool constant = true;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = x.values(r, c) - basis.center[c];
        ss += d * d;
        constant = constant && x.values(r, c) == x.values(0, c);
      }
      sd[c] = std::sqrt(ss / static_cast<double>(n - 1));
      if (constant || sd[c] == 0.0)
        throw DegenerateError(fmt::format("column '{}' is constant; correlation PCA undefined", x.labels[c]));
    }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < p; ++c) work(r, c) /= sd[c];
    basis.scale = std::move(sd);
  }

  const auto eig = symmetric_eigen(covariance_matrix(work));
  basis.eigenvalues = eig.values;
  for (double& v : basis.eigenvalues) v = std::max(v, 0.0);
  basis.components = eig.vectors.leading_columns(k);
  basis.k = k;
  return basis;
}

PcaBasis truncate(const PcaBasis& basis, std::size_t k) {
  if (k < 1 || k > basis.components.cols())
    throw InputError(fmt::format("cannot truncate a {}-component basis to {}", basis.components.cols(), k));
  PcaBasis out = basis;
  out.components = basis.components.leading_columns(k);
  out.k = k;
  return out;
}

DesignMatrix project(const DesignMatrix& x, const PcaBasis& basis) {
  if (x.cols() != basis.center.size())
    throw InputError(fmt::format("projection: design has {} columns but basis expects {}", x.cols(), basis.center.size()));
  Matrix centered = x.values;
  for (std::size_t r = 0; r < centered.rows(); ++r)
    for (std::size_t c = 0; c < centered.cols(); ++c) {
      centered(r, c) -= basis.center[c];
      if (basis.scale) centered(r, c) /= (*basis.scale)[c];
    }
  DesignMatrix out;
  out.values = centered * basis.components;
  for (std::size_t i = 0; i < basis.k; ++i) out.labels.push_back(fmt::format("PC{}", i + 1));
  out.dates = x.dates;
  out.target = x.target;
  return out;
}

Matrix reconstruct(const Matrix& scores, const PcaBasis& basis) {
  Matrix out = scores * basis.components.transpose();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) {
      if (basis.scale) out(r, c) *= (*basis.scale)[c];
      out(r, c) += basis.center[c];
    }
  return out;
}

std::vector<double> explained_variance_ratio(const PcaBasis& basis) {
  const double total = std::accumulate(basis.eigenvalues.begin(), basis.eigenvalues.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateError("total variance is zero; explained variance undefined");
  std::vector<double> out(basis.k);
  for (std::size_t i = 0; i < basis.k; ++i) out[i] = basis.eigenvalues[i] / total;
  return out;
}

std::uint64_t fingerprint(const PcaBasis& basis) {
  std::uint64_t h = 14695981039346656037ULL;
  fnv(h, basis.center);
  if (basis.scale) fnv(h, *basis.scale);
  fnv(h, basis.eigenvalues);
  fnv(h, basis.components.data());
  const std::uint64_t k = basis.k;
  fnv(h, &k, sizeof k);
  return h;
}

std::string to_json(const PcaBasis& basis) {
  nlohmann::ordered_json j;
  j["center"] = basis.center;
  j["scale"] = basis.scale ? nlohmann::ordered_json(*basis.scale) : nlohmann::ordered_json(nullptr);
  j["eigenvalues"] = basis.eigenvalues;
  j["components"] = std::vector<double>(basis.components.data().begin(), basis.components.data().end());
  j["rows"] = basis.components.rows();
  j["k"] = basis.k;
  return json_util::dump(j);
}

}  // namespace lagcast::pca
