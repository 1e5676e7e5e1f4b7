#include "mcg/dncuts.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "mcg/error.hpp"

namespace mcg {
namespace {

void fix_signs(Eigen::MatrixXd& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::Index arg = 0;
    x.col(j).cwiseAbs().maxCoeff(&arg);
    if (x(arg, j) < 0) x.col(j) = -x.col(j);
  }
}

struct Normalization {
  Eigen::VectorXd inv_sqrt_degree;
  Eigen::VectorXd trivial;  // unit-norm D^1/2 1
};

Normalization normalization(const SparseAffinity& a) {
  const Eigen::VectorXd degree = a * Eigen::VectorXd::Ones(a.cols());
  Normalization norm{Eigen::VectorXd::Zero(a.rows()), Eigen::VectorXd::Zero(a.rows())};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (degree(i) > 0.0) {
      norm.inv_sqrt_degree(i) = 1.0 / std::sqrt(degree(i));
      norm.trivial(i) = std::sqrt(degree(i));
    }
  }
  const double len = norm.trivial.norm();
  if (len == 0.0) throw ParameterError("ncuts: affinity has no edges");
  norm.trivial /= len;
  return norm;
}

EigenBasis finish(const Normalization& norm, const Eigen::MatrixXd& u, const Eigen::VectorXd& lambda) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return lambda(x) < lambda(y); });
  EigenBasis out{Eigen::MatrixXd(u.rows(), u.cols()), Eigen::VectorXd(lambda.size())};
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.vectors.col(jj) = norm.inv_sqrt_degree.cwiseProduct(u.col(order[j]));
    out.eigenvalues(jj) = lambda(order[j]);
  }
  fix_signs(out.vectors);
  return out;
}

EigenBasis ncuts_dense(const SparseAffinity& a, int k, const Normalization& norm) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  Eigen::MatrixXd m = norm.inv_sqrt_degree.asDiagonal() * dense * norm.inv_sqrt_degree.asDiagonal();
  // The trivial direction has eigenvalue 1 of m; push it to -1, below everything else.
  m -= 2.0 * norm.trivial * norm.trivial.transpose();
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0.0);
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd u(n, k);
  Eigen::VectorXd lambda(k);
  for (int j = 0; j < k; ++j) {
    u.col(j) = eig.eigenvectors().col(n - 1 - j);
    lambda(j) = 1.0 - eig.eigenvalues()(n - 1 - j);
  }
  return finish(norm, u, lambda);
}

EigenBasis ncuts_lanczos(const SparseAffinity& a, int k, const Normalization& norm, const NcutsOptions& options) {
  const Eigen::Index n = a.rows();
  SparseAffinity normalized = norm.inv_sqrt_degree.asDiagonal() * a * norm.inv_sqrt_degree.asDiagonal();
  SparseAffinity shifted(n, n);
  shifted.setIdentity();
  shifted *= 1.0 + options.shift;
  shifted -= normalized;
  Eigen::SimplicialLDLT<SparseAffinity> factor(shifted);
  if (factor.info() != Eigen::Success) throw SolverError("shift-invert factorization failed", 0.0);

  const Eigen::VectorXd& trivial = norm.trivial;
  auto deflate = [&](Eigen::VectorXd& v) { v -= trivial * trivial.dot(v); };

  Eigen::Index cap = options.max_basis > 0 ? options.max_basis : std::max<Eigen::Index>(10 * k + 50, 300);
  cap = std::min(cap, n - 1);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd basis(n, cap);
  auto fresh_start = [&](Eigen::Index used) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
      for (int pass = 0; pass < 2; ++pass) {
        deflate(v);
        if (used > 0) v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
      }
      const double len = v.norm();
      if (len > 1e-8) return Eigen::VectorXd(v / len);
    }
    throw SolverError("Lanczos could not find a new start vector", 0.0);
  };

  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis j and j+1
  Eigen::VectorXd q = fresh_start(0);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < cap; ++j) {
    basis.col(j) = q;
    Eigen::VectorXd w = factor.solve(q);
    const double aj = q.dot(w);
    alpha.push_back(aj);
    w -= aj * q;
    if (j > 0) w -= beta.back() * basis.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      deflate(w);
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    }
    double bj = w.norm();
    const Eigen::Index m = j + 1;
    const bool breakdown = bj <= 1e-12 * std::max(1.0, std::abs(aj));
    // A breakdown only certifies the current block, so keep going until the cap.
    if (m >= k && (m == cap || (!breakdown && m % 10 == 0))) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
      worst = 0.0;
      for (int i = 0; i < k; ++i) {
        const Eigen::Index col = m - 1 - i;
        const double theta = eig.eigenvalues()(col);
        const double residual = std::abs((breakdown ? 0.0 : bj) * eig.eigenvectors()(m - 1, col)) / std::abs(theta);
        worst = std::max(worst, residual);
      }
      if (worst <= options.tolerance) {
        Eigen::MatrixXd u = basis.leftCols(m) * eig.eigenvectors().rightCols(k).rowwise().reverse();
        Eigen::VectorXd lambda(k);
        for (int i = 0; i < k; ++i) {
          u.col(i).normalize();
          lambda(i) = 1.0 - u.col(i).dot(normalized * u.col(i));
        }
        return finish(norm, u, lambda);
      }
    }
    if (m == cap) break;
    if (breakdown) {
      // Invariant subspace found; continue in a fresh orthogonal direction.
      beta.push_back(0.0);
      q = fresh_start(m);
    } else {
      beta.push_back(bj);
      q = w / bj;
    }
  }
  throw SolverError("Lanczos did not converge within " + std::to_string(cap) + " basis vectors", worst);
}

}  // namespace

std::vector<Eigen::Index> pixel_decimate(int height, int width) {
  std::vector<Eigen::Index> kept;
  kept.reserve(static_cast<std::size_t>((height + 1) / 2) * static_cast<std::size_t>((width + 1) / 2));
  for (int y = 0; y < height; y += 2) {
    for (int x = 0; x < width; x += 2) kept.push_back(static_cast<Eigen::Index>(y) * width + x);
  }
  return kept;
}

DecimationStep decimate_square_step(const SparseAffinity& a, Dims dims) {
  if (a.rows() != static_cast<Eigen::Index>(dims.size()) || a.cols() != a.rows()) {
    throw ParameterError("decimate_square_step: affinity size does not match grid");
  }
  DecimationStep step;
  step.kept = pixel_decimate(dims.height, dims.width);
  step.next_dims = Dims{(dims.height + 1) / 2, (dims.width + 1) / 2};
  const auto cols = static_cast<Eigen::Index>(step.kept.size());

  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (SparseAffinity::InnerIterator it(a, step.kept[static_cast<std::size_t>(j)]); it; ++it) {
      triplets.emplace_back(it.row(), j, it.value());
    }
  }
  step.b.resize(a.rows(), cols);
  step.b.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd scale = step.b * Eigen::VectorXd::Ones(cols);
  for (Eigen::Index i = 0; i < scale.size(); ++i) scale(i) = scale(i) != 0.0 ? 1.0 / scale(i) : 1.0;
  step.c = scale.asDiagonal() * step.b;

  SparseAffinity product = step.c.transpose() * step.b;
  SparseAffinity transposed = product.transpose();
  step.next = 0.5 * (product + transposed);
  step.next.prune(0.0);
  return step;
}

EigenBasis ncuts(const SparseAffinity& a, int k, const NcutsOptions& options) {
  const Eigen::Index n = a.rows();
  if (n == 0) throw ParameterError("ncuts: empty affinity");
  if (k < 1 || k + 1 > n) {
    throw ParameterError("ncuts: need 1 <= k <= n - 1 (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
  }
  const Normalization norm = normalization(a);
  const bool dense = options.method == NcutsOptions::Method::Dense ||
                     (options.method == NcutsOptions::Method::Auto && n < options.dense_below);
  return dense ? ncuts_dense(a, k, norm) : ncuts_lanczos(a, k, norm, options);
}

EigenBasis dncuts(const SparseAffinity& a, int d, int k, Dims dims, const NcutsOptions& options) {
  if (d < 0) throw ParameterError("dncuts: negative decimation count");
  Dims coarse = dims;
  for (int s = 0; s < d; ++s) coarse = Dims{(coarse.height + 1) / 2, (coarse.width + 1) / 2};
  if (coarse.size() < static_cast<std::size_t>(k) + 1) {
    throw ParameterError("dncuts: " + std::to_string(d) + " decimations leave " + std::to_string(coarse.size()) +
                         " pixels, need at least k + 1 = " + std::to_string(k + 1));
  }
  std::vector<SparseAffinity> upsample;
  upsample.reserve(static_cast<std::size_t>(d));
  SparseAffinity current = a;
  Dims current_dims = dims;
  for (int s = 0; s < d; ++s) {
    DecimationStep step = decimate_square_step(current, current_dims);
    upsample.push_back(std::move(step.c));
    current = std::move(step.next);
    current_dims = step.next_dims;
  }
  EigenBasis basis = ncuts(current, k, options);
  for (auto it = upsample.rbegin(); it != upsample.rend(); ++it) basis.vectors = (*it) * basis.vectors;
  return whiten(basis);
}

EigenBasis whiten(const EigenBasis& basis) {
  if (basis.n() < 2) throw ParameterError("whiten: need at least two rows");
  EigenBasis out = basis;
  const double n = static_cast<double>(basis.n());
  for (Eigen::Index j = 0; j < out.k(); ++j) {
    auto col = out.vectors.col(j);
    const double scale = col.cwiseAbs().maxCoeff();
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd <= 64 * std::numeric_limits<double>::epsilon() * scale || sd == 0.0) {
      col.setZero();
    } else {
      col /= sd;
    }
  }
  return out;
}

ContourMap spectral_gradients(const EigenBasis& basis, Dims dims, std::span<const double> weights) {
  if (basis.n() != static_cast<Eigen::Index>(dims.size())) {
    throw ParameterError("spectral_gradients: basis has " + std::to_string(basis.n()) + " rows for a " +
                         std::to_string(dims.height) + "x" + std::to_string(dims.width) + " grid");
  }
  if (static_cast<Eigen::Index>(weights.size()) != basis.k()) {
    throw ParameterError("spectral_gradients: need one weight per eigenvector");
  }
  ContourMap cm(dims);
  for (Eigen::Index j = 0; j < basis.k(); ++j) {
    const double lambda = basis.eigenvalues(j);
    const double w = weights[static_cast<std::size_t>(j)];
    if (w < 0.0) throw ParameterError("spectral_gradients: weights must be non-negative");
    if (lambda <= 1e-12 || w == 0.0) continue;
    const double scale = w / std::sqrt(lambda);
    const auto v = basis.vectors.col(j);
    for_each_edge(dims, [&](const GridEdge& e) {
      cm.data()[e.grid] += scale * std::abs(v(static_cast<Eigen::Index>(e.p)) - v(static_cast<Eigen::Index>(e.q)));
    });
  }
  const double peak = cm.max_strength();
  if (peak > 0.0) {
    for (double& s : cm.data()) s /= peak;
  }
  return cm;
}

}  // namespace mcg
