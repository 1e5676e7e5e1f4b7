#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "mcg/align.hpp"
#include "mcg/error.hpp"
#include "oracle.hpp"

using namespace mcg;

namespace {

LabelMap quadrants4() {
  LabelMap m{{4, 4}, std::vector<std::uint32_t>(16)};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) m.labels[static_cast<std::size_t>(y * 4 + x)] = static_cast<std::uint32_t>((y / 2) * 2 + x / 2);
  }
  return m;
}

LabelMap columns(int h, int w) {
  LabelMap m{{h, w}, std::vector<std::uint32_t>(static_cast<std::size_t>(h * w))};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.labels[static_cast<std::size_t>(y * w + x)] = static_cast<std::uint32_t>(x);
  }
  return m;
}

bool respects(const LabelMap& coarse, const LabelMap& superpixels) {
  std::map<std::uint32_t, std::uint32_t> seen;
  for (std::size_t i = 0; i < coarse.labels.size(); ++i) {
    auto [it, fresh] = seen.emplace(superpixels.labels[i], coarse.labels[i]);
    if (it->second != coarse.labels[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("projecting a partition onto itself is the identity") {
  std::mt19937_64 rng(3);
  const LabelMap s = oracle::random_regions(rng, {8, 8}, 7);
  CHECK(project(s, s) == canonicalize(s));
}

TEST_CASE("halves projected onto quadrants") {
  const LabelMap halves{{4, 4}, {0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1}};
  CHECK(project(halves, quadrants4()) == halves);
}

TEST_CASE("projection takes the per-region majority") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelMap r = oracle::random_regions(rng, {8, 8}, 5);
    const LabelMap s = oracle::random_regions(rng, {8, 8}, 9);
    CHECK(project(r, s) == oracle::tally_project(r, s));
  }
}

TEST_CASE("projection ties go to the smaller label") {
  const LabelMap r{{1, 2}, {0, 1}};
  const LabelMap s{{1, 2}, {0, 0}};
  CHECK(project(r, s).labels == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("projection is idempotent") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelMap r = oracle::random_regions(rng, {7, 9}, 4 + trial % 5);
    const LabelMap s = oracle::random_regions(rng, {7, 9}, 6 + trial % 7);
    const LabelMap once = project(r, s);
    CHECK(project(once, s) == once);
  }
}

TEST_CASE("projection rejects mismatched dimensions") {
  CHECK_THROWS_AS(project(LabelMap{{1, 2}, {0, 0}}, LabelMap{{2, 1}, {0, 0}}), ParameterError);
}

TEST_CASE("rescaling to the same size keeps the map") {
  std::mt19937_64 rng(17);
  const LabelMap s = canonicalize(oracle::random_regions(rng, {5, 6}, 4));
  CHECK(rescale_segmentation(s, {5, 6}) == s);
}

TEST_CASE("doubling a 2x2 map fills 2x2 blocks") {
  const LabelMap up = rescale_segmentation(LabelMap{{2, 2}, {0, 1, 2, 3}}, {4, 4});
  CHECK(up.labels == quadrants4().labels);
}

TEST_CASE("rescaling picks the nearest source pixel centre") {
  std::mt19937_64 rng(19);
  for (Dims target : {Dims{4, 4}, Dims{7, 2}, Dims{2, 5}, Dims{1, 1}}) {
    const LabelMap s = oracle::random_regions(rng, {3, 3}, 5);
    LabelMap want{target, std::vector<std::uint32_t>(target.size())};
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        const int sy = static_cast<int>(std::floor((y + 0.5) * 3.0 / target.height));
        const int sx = static_cast<int>(std::floor((x + 0.5) * 3.0 / target.width));
        want.labels[target.index(y, x)] = s.at(sy, sx);
      }
    }
    CHECK(rescale_segmentation(s, target) == oracle::relabel_first_seen(want));
  }
  CHECK_THROWS_AS(rescale_segmentation(LabelMap{{1, 1}, {0}}, {0, 3}), ParameterError);
}

TEST_CASE("aligning onto the own finest partition keeps the strength grid") {
  std::mt19937_64 rng(23);
  const Ucm u = oracle::random_merge_ucm(rng, oracle::random_regions(rng, {8, 8}, 9));
  CHECK(ucm_strength_grid(align_ucm(u, u.finest)) == ucm_strength_grid(u));
  CHECK(ucm_strength_grid(align_ucm(oracle::fix_b(), oracle::fix_b().finest)) ==
        ucm_strength_grid(oracle::fix_b()));
}

TEST_CASE("half resolution boundary snaps onto the target columns") {
  const Ucm coarse{LabelMap{{2, 2}, {0, 1, 0, 1}}, {{2, {0, 1}, 0.7}}};
  const Ucm aligned = align_ucm(coarse, columns(4, 4));
  CHECK(aligned.finest == columns(4, 4));
  const ContourMap g = ucm_strength_grid(aligned);
  for (int y = 0; y < 4; ++y) {
    CHECK(g.right(y, 0) == 0.0);
    CHECK(g.right(y, 1) == 0.7);
    CHECK(g.right(y, 2) == 0.0);
  }
}

TEST_CASE("aligned hierarchies never split target superpixels") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Ucm u = oracle::random_merge_ucm(rng, oracle::random_regions(rng, {6, 6}, 8));
    const LabelMap target = canonicalize(oracle::random_regions(rng, {12, 11}, 20));
    const Ucm a = align_ucm(u, target);
    CHECK(a.finest == target);
    // Level 0 only joins superpixels that no coarse boundary separates.
    const auto source = merge_levels(u);
    std::vector<double> levels;
    for (double t : merge_levels(a)) {
      CHECK(respects(sample_hierarchy(a, t).labels, target));
      if (t > 0.0) levels.push_back(t);
    }
    CHECK(levels.size() <= source.size());
    for (double t : levels) CHECK(std::find(source.begin(), source.end(), t) != source.end());
  }
}

TEST_CASE("combining identical hierarchies keeps their strengths") {
  std::mt19937_64 rng(31);
  const Ucm u = oracle::random_merge_ucm(rng, oracle::random_regions(rng, {8, 8}, 9));
  const std::vector<Ucm> three(3, u);
  const std::vector<double> w(3, 1.0 / 3.0);
  const ContourMap want = ucm_strength_grid(u);
  const ContourMap got = combine_strengths(three, w);
  for (std::size_t e = 0; e < want.data().size(); ++e) CHECK(got.data()[e] == doctest::Approx(want.data()[e]));
  CHECK(ucm_strength_grid(multiscale_combine(three, w)) == ucm_strength_grid(build_ucm(u.finest, got)));
}

TEST_CASE("a boundary present in one of two inputs gets half its strength") {
  const Ucm split{columns(2, 2), {{2, {0, 1}, 0.6}}};
  const Ucm flat{columns(2, 2), {{2, {0, 1}, 0.0}}};
  const std::vector<Ucm> both{split, flat};
  const std::vector<double> w{0.5, 0.5};
  const ContourMap g = combine_strengths(both, w);
  CHECK(g.right(0, 0) == doctest::Approx(0.3));
  const Ucm c = multiscale_combine(both, w);
  REQUIRE(c.merges.size() == 1);
  CHECK(c.merges[0].lambda == doctest::Approx(0.3));
}

TEST_CASE("combined strengths equal a per-edge weighted mean") {
  std::vector<Ucm> variants(3, oracle::fix_b());
  variants[1].merges[0].lambda = 0.3;
  variants[2].merges[1].lambda = 0.5;
  variants[2].merges[2].lambda = 0.8;
  const std::vector<double> w{0.2, 0.3, 0.5};
  const ContourMap g = combine_strengths(variants, w);
  for (int y = 0; y < 4; ++y) {
    CHECK(g.right(y, 0) == doctest::Approx(0.2 * 0.2 + 0.3 * 0.3 + 0.5 * 0.2));
    CHECK(g.right(y, 1) == doctest::Approx(0.2 * 0.9 + 0.3 * 0.9 + 0.5 * 0.8));
    CHECK(g.right(y, 2) == doctest::Approx(0.2 * 0.4 + 0.3 * 0.4 + 0.5 * 0.5));
  }
}

TEST_CASE("calibration passes combined strengths through a sigmoid") {
  const std::vector<Ucm> one{oracle::fix_b()};
  const std::vector<double> w{1.0};
  const ContourMap g = combine_strengths(one, w, Calibration{true, 2.0, -1.0});
  CHECK(g.right(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-(2.0 * 0.9 - 1.0)))));
  CHECK(g.down(0, 0) == 0.0);  // inside a superpixel
}

TEST_CASE("a single input with weight one is returned unchanged") {
  const std::vector<Ucm> one{oracle::fix_b()};
  const std::vector<double> w{1.0};
  CHECK(multiscale_combine(one, w) == oracle::fix_b());
}

TEST_CASE("combination rejects bad inputs") {
  const Ucm a = oracle::fix_b();
  CHECK_THROWS_AS(combine_strengths(std::vector<Ucm>{}, std::vector<double>{}), ParameterError);
  CHECK_THROWS_AS(combine_strengths(std::vector<Ucm>{a, a}, std::vector<double>{0.5, 0.4}), ParameterError);
  CHECK_THROWS_AS(combine_strengths(std::vector<Ucm>{a, a}, std::vector<double>{1.0}), ParameterError);
  Ucm other{LabelMap{{4, 4}, std::vector<std::uint32_t>(16, 0)}, {}};
  CHECK_THROWS_AS(combine_strengths(std::vector<Ucm>{a, other}, std::vector<double>{0.5, 0.5}), ParameterError);
}
