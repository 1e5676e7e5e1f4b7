#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "mcg/affinity.hpp"
#include "mcg/dncuts.hpp"
#include "mcg/error.hpp"
#include "oracle.hpp"

using namespace mcg;

namespace {

SparseAffinity from_dense(const Eigen::MatrixXd& m) { return m.sparseView(); }

SparseAffinity grid_affinity(std::mt19937_64& rng, Dims d, int radius = 2, double sigma = 0.2) {
  return build_affinity(oracle::random_contour_map(rng, d), radius, sigma);
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double density = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < density) m(i, j) = m(j, i) = u(rng);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("pixel decimation keeps even rows and columns") {
  CHECK(pixel_decimate(4, 4) == std::vector<Eigen::Index>{0, 2, 8, 10});
  CHECK(pixel_decimate(3, 3) == std::vector<Eigen::Index>{0, 2, 6, 8});
  CHECK(pixel_decimate(1, 1) == std::vector<Eigen::Index>{0});
  CHECK(pixel_decimate(5, 2).size() == 3);
}

TEST_CASE("decimation on an all-ones affinity") {
  const DecimationStep s = decimate_square_step(from_dense(Eigen::MatrixXd::Ones(4, 4)), {2, 2});
  CHECK(s.kept == std::vector<Eigen::Index>{0});
  CHECK(s.next_dims == Dims{1, 1});
  CHECK(Eigen::MatrixXd(s.b) == Eigen::MatrixXd::Ones(4, 1));
  CHECK(Eigen::MatrixXd(s.c) == Eigen::MatrixXd::Ones(4, 1));
  CHECK(Eigen::MatrixXd(s.next)(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("decimation leaves zero rows unscaled") {
  const DecimationStep s = decimate_square_step(from_dense(Eigen::MatrixXd::Identity(4, 4)), {2, 2});
  Eigen::MatrixXd e0 = Eigen::MatrixXd::Zero(4, 1);
  e0(0, 0) = 1.0;
  CHECK(Eigen::MatrixXd(s.b) == e0);
  CHECK(Eigen::MatrixXd(s.c) == e0);
  CHECK(Eigen::MatrixXd(s.next)(0, 0) == 1.0);
}

TEST_CASE("decimation matches a dense computation") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = random_symmetric(rng, 9, 0.6);
    const DecimationStep s = decimate_square_step(from_dense(a), {3, 3});
    Eigen::MatrixXd b(9, 4);
    const int kept[4] = {0, 2, 6, 8};
    for (int j = 0; j < 4; ++j) b.col(j) = a.col(kept[j]);
    Eigen::MatrixXd c = b;
    for (int i = 0; i < 9; ++i) {
      const double sum = b.row(i).sum();
      if (sum != 0.0) c.row(i) /= sum;
    }
    const Eigen::MatrixXd want = c.transpose() * b;
    const Eigen::MatrixXd sym = 0.5 * (want + want.transpose());
    CHECK((Eigen::MatrixXd(s.next) - sym).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd next(s.next);
    CHECK(next == next.transpose());
    CHECK(next.minCoeff() >= 0.0);
  }
}

TEST_CASE("disconnected cliques give a zero eigenvalue and a two-sign vector") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, 8);
  a.topLeftCorner(4, 4).setOnes();
  a.bottomRightCorner(4, 4).setOnes();
  const EigenBasis eb = ncuts(from_dense(a), 1);
  CHECK(std::abs(eb.eigenvalues(0)) < 1e-9);
  const Eigen::VectorXd v = eb.vectors.col(0);
  for (int i = 1; i < 4; ++i) {
    CHECK(v(i) == doctest::Approx(v(0)));
    CHECK(v(4 + i) == doctest::Approx(v(4)));
  }
  CHECK(v(0) * v(4) < 0.0);
}

TEST_CASE("three-node path has second eigenvalue 1") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
  const EigenBasis eb = ncuts(from_dense(a), 1);
  CHECK(eb.eigenvalues(0) == doctest::Approx(1.0));
  const auto dense = oracle::dense_ncuts(a, 1);
  CHECK(oracle::max_principal_angle(eb.vectors, dense.vectors) < 1e-8);
}

TEST_CASE("dense solver agrees with an independent eigendecomposition") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = random_symmetric(rng, 30);
    const EigenBasis eb = ncuts(from_dense(a), 4);
    const auto dense = oracle::dense_ncuts(a, 4);
    CHECK(oracle::max_principal_angle(eb.vectors, dense.vectors) < 1e-6);
    for (int j = 0; j < 4; ++j) CHECK(eb.eigenvalues(j) == doctest::Approx(dense.values(j)).epsilon(1e-9));
  }
}

TEST_CASE("Lanczos solver agrees with the dense solver") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const SparseAffinity a = grid_affinity(rng, {16, 16});
    NcutsOptions lanczos;
    lanczos.method = NcutsOptions::Method::Lanczos;
    NcutsOptions exact;
    exact.method = NcutsOptions::Method::Dense;
    const EigenBasis l = ncuts(a, 6, lanczos);
    const EigenBasis d = ncuts(a, 6, exact);
    CHECK(oracle::max_principal_angle(l.vectors, d.vectors) < 1e-6);
    for (int j = 0; j < 6; ++j) CHECK(l.eigenvalues(j) == doctest::Approx(d.eigenvalues(j)).epsilon(1e-8));
  }
}

TEST_CASE("eigenvalues ascend and vectors are finite") {
  std::mt19937_64 rng(32);
  const EigenBasis eb = ncuts(grid_affinity(rng, {12, 12}), 8);
  CHECK(eb.k() == 8);
  CHECK(eb.n() == 144);
  for (int j = 1; j < 8; ++j) CHECK(eb.eigenvalues(j) >= eb.eigenvalues(j - 1));
  CHECK(eb.vectors.allFinite());
}

TEST_CASE("ncuts parameter checks") {
  CHECK_THROWS_AS(ncuts(SparseAffinity(0, 0), 1), ParameterError);
  CHECK_THROWS_AS(ncuts(from_dense(Eigen::MatrixXd::Ones(3, 3)), 3), ParameterError);
  CHECK_THROWS_AS(ncuts(from_dense(Eigen::MatrixXd::Ones(3, 3)), 0), ParameterError);
}

TEST_CASE("dncuts with no decimation is whitened ncuts, bitwise") {
  std::mt19937_64 rng(40);
  const Dims d{10, 10};
  const SparseAffinity a = grid_affinity(rng, d);
  const EigenBasis x = dncuts(a, 0, 5, d);
  const EigenBasis y = whiten(ncuts(a, 5));
  CHECK(x.vectors == y.vectors);
  CHECK(x.eigenvalues == y.eigenvalues);
}

TEST_CASE("dncuts separates the step image halves") {
  const ContourMap cm = oracle::column_edges({4, 4}, {0.0, 1.0, 0.0});
  const SparseAffinity a = build_affinity(cm, 1, 0.1);
  auto separates = [](const Eigen::VectorXd& v) {
    bool left_positive = true, right_positive = true;
    for (int p = 0; p < 16; ++p) {
      const bool left = p % 4 < 2;
      left_positive = left_positive && ((v(p) > 0) == left) && v(p) != 0.0;
      right_positive = right_positive && ((v(p) > 0) == !left) && v(p) != 0.0;
    }
    return left_positive || right_positive;
  };
  CHECK(separates(ncuts(a, 1).vectors.col(0)));
  CHECK(separates(dncuts(a, 1, 1, {4, 4}).vectors.col(0)));
}

TEST_CASE("dncuts returns full-resolution bases and is deterministic") {
  std::mt19937_64 rng(41);
  const Dims d{20, 17};
  const SparseAffinity a = grid_affinity(rng, d);
  for (int steps : {1, 2, 3}) {
    const EigenBasis x = dncuts(a, steps, 4, d);
    CHECK(x.n() == 340);
    const EigenBasis y = dncuts(a, steps, 4, d);
    CHECK(x.vectors == y.vectors);
  }
}

TEST_CASE("dncuts refuses grids decimated below k+1 pixels") {
  std::mt19937_64 rng(42);
  const Dims d{4, 4};
  CHECK_THROWS_AS(dncuts(grid_affinity(rng, d), 2, 1, d), ParameterError);
}

TEST_CASE("dncuts Fiedler signs agree with exact ncuts on most pixels") {
  // Corpus and bound fixed from the committed oracle run.
  constexpr double kMinAgreement = 0.90;
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    const int side = 12 + 4 * (trial % 5);
    const Dims d{side, side};
    const SparseAffinity a = build_affinity(oracle::region_contour_map(rng, d, 2), 3, 0.1);
    const EigenBasis exact = ncuts(a, 1);
    for (int steps : {1, 2}) {
      const EigenBasis approx = dncuts(a, steps, 1, d);
      int same = 0;
      for (Eigen::Index p = 0; p < approx.n(); ++p) {
        same += (approx.vectors(p, 0) > 0) == (exact.vectors(p, 0) > 0);
      }
      const double agree = std::max(same, static_cast<int>(approx.n()) - same) / static_cast<double>(approx.n());
      MESSAGE("side " << side << " steps " << steps << " agreement " << agree);
      CHECK(agree >= kMinAgreement);
    }
  }
}

TEST_CASE("whiten standardizes columns") {
  EigenBasis eb;
  eb.vectors = Eigen::MatrixXd(4, 1);
  eb.vectors << 1, 1, 1, 1;
  eb.eigenvalues = Eigen::VectorXd::Ones(1);
  CHECK(whiten(eb).vectors.isZero());

  eb.vectors = Eigen::MatrixXd(2, 1);
  eb.vectors << 0, 2;
  const EigenBasis w = whiten(eb);
  CHECK(w.vectors(0, 0) == doctest::Approx(-1.0));
  CHECK(w.vectors(1, 0) == doctest::Approx(1.0));

  std::mt19937_64 rng(44);
  std::normal_distribution<double> g(3.0, 2.0);
  eb.vectors = Eigen::MatrixXd(50, 3);
  for (Eigen::Index i = 0; i < eb.vectors.size(); ++i) eb.vectors.data()[i] = g(rng);
  eb.eigenvalues = Eigen::VectorXd::Ones(3);
  const EigenBasis r = whiten(eb);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(r.vectors.col(j).mean()) < 1e-12);
    CHECK(std::abs(r.vectors.col(j).squaredNorm() / 50.0 - 1.0) < 1e-9);
  }
}

TEST_CASE("spectral gradients") {
  const Dims d{4, 4};
  EigenBasis eb;
  eb.vectors = Eigen::MatrixXd::Constant(16, 1, 0.7);
  eb.eigenvalues = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(spectral_gradients(eb, d, std::vector<double>{1.0}).max_strength() == 0.0);

  std::mt19937_64 rng(45);
  eb.vectors = Eigen::MatrixXd::Random(16, 2);
  eb.eigenvalues = Eigen::VectorXd::Constant(2, 0.5);
  CHECK(spectral_gradients(eb, d, std::vector<double>{0.0, 0.0}).max_strength() == 0.0);
  CHECK_THROWS_AS(spectral_gradients(eb, {3, 4}, std::vector<double>{1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(spectral_gradients(eb, d, std::vector<double>{1.0}), ParameterError);
}

TEST_CASE("spectral gradient of the step image peaks on the step") {
  const ContourMap cm = oracle::column_edges({4, 4}, {0.0, 1.0, 0.0});
  const EigenBasis eb = ncuts(build_affinity(cm, 1, 0.1), 1);
  const ContourMap g = spectral_gradients(eb, {4, 4}, std::vector<double>{1.0});
  for (const auto& e : oracle::edges({4, 4})) {
    const bool step = e.q == e.p + 1 && e.p % 4 == 1;
    if (step) {
      CHECK(g.at(e.gy, e.gx) == doctest::Approx(1.0));
    } else {
      CHECK(g.at(e.gy, e.gx) < g.right(0, 1));
    }
  }
}

TEST_CASE("spectral gradients weight by inverse root eigenvalue") {
  EigenBasis eb;
  eb.vectors = Eigen::MatrixXd::Zero(2, 2);
  eb.vectors << 0, 0, 1, 2;
  eb.eigenvalues = Eigen::Vector2d(0.25, 4.0);
  // One edge: |1|/0.5 + |2|/2 = 3 before normalization, 1 after.
  const ContourMap g = spectral_gradients(eb, {1, 2}, std::vector<double>{1.0, 1.0});
  CHECK(g.right(0, 0) == doctest::Approx(1.0));
}
