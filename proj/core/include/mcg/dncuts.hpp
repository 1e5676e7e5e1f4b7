#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mcg/affinity.hpp"
#include "mcg/types.hpp"

namespace mcg {

/// k eigenvectors (columns) with ascending normalized-Laplacian eigenvalues.
struct EigenBasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd eigenvalues;

  Eigen::Index n() const { return vectors.rows(); }
  Eigen::Index k() const { return vectors.cols(); }
};

/// One squaring-and-decimation step of the affinity pyramid.
struct DecimationStep {
  std::vector<Eigen::Index> kept;  ///< row-major indices surviving decimation
  Dims next_dims;
  SparseAffinity b;     ///< A restricted to the kept columns
  SparseAffinity c;     ///< b with unit row sums (zero rows left unscaled)
  SparseAffinity next;  ///< symmetrized c^T b
};

struct NcutsOptions {
  enum class Method { Auto, Dense, Lanczos };

  Method method = Method::Auto;
  /// Auto uses the dense solver below this many nodes.
  Eigen::Index dense_below = 400;
  std::uint64_t seed = 0;
  /// Relative Ritz residual required for every returned pair.
  double tolerance = 1e-10;
  /// Krylov basis cap; 0 picks max(10k + 50, 300) bounded by n - 1.
  Eigen::Index max_basis = 0;
  /// Shift of the shift-invert operator (L + shift I)^-1.
  double shift = 1e-4;
};

/// Pixels at even row and even column, ascending.
std::vector<Eigen::Index> pixel_decimate(int height, int width);

DecimationStep decimate_square_step(const SparseAffinity& a, Dims dims);

/// Eigenvectors 2..k+1 of D^-1/2 (D - A) D^-1/2 mapped back through D^-1/2.
/// The trivial D^1/2 1 direction is deflated rather than dropped, so
/// multiplicities of eigenvalue 0 are handled. Each vector's largest
/// magnitude entry is made positive.
EigenBasis ncuts(const SparseAffinity& a, int k, const NcutsOptions& options = {});

/// Downsampled normalized cuts: d squaring-and-decimation steps, ncuts on
/// the coarsest affinity, upsampling through the row-normalized factors,
/// then whitening.
EigenBasis dncuts(const SparseAffinity& a, int d, int k, Dims dims, const NcutsOptions& options = {});

/// Per column: subtract the mean and divide by the standard deviation
/// (divisor n). Zero-variance columns become zero.
EigenBasis whiten(const EigenBasis& basis);

/// Edge strength = sum_j weights[j] * |eigenvector j difference| / sqrt(lambda_j),
/// skipping lambda_j <= 1e-12, then scaled so the maximum is 1 (when non-zero).
ContourMap spectral_gradients(const EigenBasis& basis, Dims dims, std::span<const double> weights);

}  // namespace mcg
