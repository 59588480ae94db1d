#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lagcast/matrix.hpp"

namespace lagcast::pca {

/// Covariance PCA works on centered columns; correlation PCA also divides each
/// column by its sample standard deviation.
enum class Scaling { Covariance, Correlation };

std::string_view scaling_name(Scaling s) noexcept;
/// Accepts "covariance" or "correlation". Throws ConfigError.
Scaling parse_scaling(std::string_view name);

/// Sample covariance (n-1 denominator), exactly symmetric.
/// Throws InputError for fewer than two rows.
Matrix covariance_matrix(const Matrix& x);

struct EigenDecomposition {
  /// Nonincreasing.
  std::vector<double> values;
  /// Column i is the unit eigenvector for values[i]; its largest-magnitude
  /// entry is positive.
  Matrix vectors;
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 times the matrix's Frobenius norm. Equal eigenvalues keep the order
/// in which the rotations left them. Throws InputError if `s` is not square or
/// not symmetric within 1e-8 (relative to its largest entry).
EigenDecomposition symmetric_eigen(const Matrix& s);

struct PcaBasis {
  std::vector<std::string> input_labels;
  std::vector<double> center;
  /// Per-column divisor; present only for correlation PCA.
  std::optional<std::vector<double>> scale;
  /// p x k, orthonormal columns ordered by decreasing eigenvalue.
  Matrix components;
  /// Full spectrum (length p), nonincreasing, negatives clamped to zero.
  std::vector<double> eigenvalues;
  std::size_t k = 0;
};

/// Top-k eigenpairs of the (training) covariance. Throws InputError if k is
/// outside [1, cols] or there are fewer than two rows; DegenerateError for a
/// constant column under correlation scaling.
PcaBasis fit_pca(const DesignMatrix& x, std::size_t k, Scaling scaling = Scaling::Covariance);

/// Same basis keeping only the leading k components.
PcaBasis truncate(const PcaBasis& basis, std::size_t k);

/// Scores (x - center) / scale * components, labeled PC1..PCk. Dates and
/// target are carried along. Throws InputError on column-count mismatch.
DesignMatrix project(const DesignMatrix& x, const PcaBasis& basis);

/// Maps scores back to the input space.
Matrix reconstruct(const Matrix& scores, const PcaBasis& basis);

/// eigenvalue_i / sum(all eigenvalues) for the retained components.
/// Throws DegenerateError when the total variance is zero.
std::vector<double> explained_variance_ratio(const PcaBasis& basis);

/// FNV-1a hash over every stored number; equal bases hash equally.
std::uint64_t fingerprint(const PcaBasis& basis);

/// {center, scale, eigenvalues, components (row-major p x k), k}
std::string to_json(const PcaBasis& basis);

}  // namespace lagcast::pca
