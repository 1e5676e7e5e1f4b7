#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "mcg/error.hpp"
#include "mcg/eval.hpp"
#include "mcg/pipeline.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

using namespace mcg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcg_test_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.scales = {0.5, 1.0};
  c.dncuts_k = 6;
  c.affinity_radius = 3;
  c.forest_trees = 8;
  c.s_samples = 4;
  return c;
}

}  // namespace

TEST_CASE("config json round trip") {
  PipelineConfig c;
  c.scales = {1.0, 2.0};
  c.seed = 99;
  c.calibration = Calibration{true, 3.0, -1.5};
  c.working_point = {WorkingTarget::Kind::Quality, 0.8};
  const PipelineConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  CHECK(config_hash(c) != config_hash(PipelineConfig{}));
}

TEST_CASE("config keeps defaults and rejects bad input") {
  const PipelineConfig c = config_from_json(nlohmann::json{{"mmr_lambda", 0.25}});
  CHECK(c.mmr_lambda == 0.25);
  CHECK(c.dncuts_k == 16);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"mmr_lamda", 0.25}}), ParameterError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"max_tuple", 5}}), ParameterError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"scales", "big"}}), ParameterError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"working_point", {{"kind", "area"}, {"value", 1}}}}), ParameterError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ParameterError);
  PipelineConfig bad;
  bad.dedup_threshold = 0.0;
  CHECK_THROWS_AS(validate(bad), ParameterError);
}

TEST_CASE("config files") {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "c.json") << "{\"seed\": 5}";
  CHECK(load_config(dir / "c.json").seed == 5);
  std::ofstream(dir / "bad.json") << "{seed";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), FormatError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
}

TEST_CASE("bilinear resampling") {
  Image img{{2, 2}, 1, {0.0, 1.0, 0.0, 1.0}};
  const Image same = resample_bilinear(img, {2, 2});
  CHECK(same.data == img.data);
  const Image up = resample_bilinear(img, {4, 4});
  CHECK(up.dims == Dims{4, 4});
  CHECK(up.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(up.at(0, 3, 0) == doctest::Approx(1.0));
  CHECK(up.at(2, 1, 0) == doctest::Approx(0.25));
  Image flat{{5, 3}, 3, std::vector<double>(45, 0.4)};
  for (double v : resample_bilinear(flat, {2, 7}).data) CHECK(v == doctest::Approx(0.4));
}

TEST_CASE("scale names") {
  CHECK(scale_name(0.5) == "scale_0.5");
  CHECK(scale_name(1.0) == "scale_1");
  CHECK(scale_name(2.0) == "scale_2");
}

TEST_CASE("segmenting the step image") {
  PipelineConfig c = small_config();
  c.scales = {0.5, 1.0, 2.0};
  const HierarchySet set = segment_image(oracle::fix_a_image(), c);
  CHECK(set.names == std::vector<std::string>{"scale_0.5", "scale_1", "scale_2", "multiscale"});
  REQUIRE(set.ucms.size() == 4);
  for (const Ucm& u : set.ucms) {
    CHECK(u.finest == set.ucms.back().finest);
    CHECK(u.finest.dims == Dims{4, 4});
    Dendrogram t(u);  // valid
  }
  // The step boundary is the strongest one of the combined hierarchy.
  const ContourMap g = ucm_strength_grid(set.ucms.back());
  for (int y = 0; y < 4; ++y) CHECK(g.right(y, 1) == g.max_strength());
  CHECK(g.max_strength() > 0.0);
}

TEST_CASE("segmentation of one scale is deterministic") {
  std::mt19937_64 rng(5);
  const auto scene = synthetic::rectangles(rng, {24, 24}, 6);
  const PipelineConfig c = small_config();
  CHECK(segment_single_scale(scene.image, c) == segment_single_scale(scene.image, c));
  CHECK(contour_cue(scene.image, c) == contour_cue(scene.image, c));
  for (double v : contour_cue(scene.image, c).data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("hierarchies round trip through files") {
  std::mt19937_64 rng(7);
  const auto scene = synthetic::rectangles(rng, {20, 20}, 5);
  const HierarchySet set = segment_image(scene.image, small_config());
  const fs::path dir = scratch("hier");
  write_hierarchies(set, dir);
  for (const fs::path& input : {dir, dir / "hierarchies.txt"}) {
    const HierarchySet back = load_hierarchies({input});
    CHECK(back.names == set.names);
    CHECK(back.ucms == set.ucms);
    CHECK(back.files.size() == set.ucms.size());
  }
  const HierarchySet one = load_hierarchies({dir / "multiscale.ucm"});
  CHECK(one.ucms.size() == 1);
  CHECK(one.names == std::vector<std::string>{"multiscale"});
  CHECK_THROWS_AS(load_hierarchies({dir / "nothing.ucm"}), IoError);
}

TEST_CASE("ranked lists and proposals") {
  std::mt19937_64 rng(11);
  const auto scene = synthetic::rectangles(rng, {20, 20}, 5);
  const PipelineConfig c = small_config();
  const HierarchySet set = segment_image(scene.image, c);
  const auto lists = build_ranked_lists(set, c);
  REQUIRE(lists.size() == 4 * set.ucms.size());
  CHECK(lists[0].id == "scale_0.5/singletons");
  CHECK(lists[set.ucms.size()].id == "scale_0.5/pairs");
  CHECK(lists.back().id == "multiscale/quadruplets");
  for (const auto& l : lists) CHECK(l.proposals.size() <= c.max_per_list);

  const auto props = propose(set, nullptr, nullptr, c, 50);
  CHECK(props.size() <= 50);
  CHECK_FALSE(props.empty());
  const MaskBuilder masks(set);
  std::vector<BinaryMask> m;
  for (const auto& p : props) {
    CHECK_FALSE(p.score.has_value());
    m.push_back(masks(p.proposal));
  }
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) CHECK(jaccard(m[a], m[b]) <= c.dedup_threshold);
  }
  for (std::size_t i = 1; i < props.size(); ++i) CHECK(props[i - 1].proposal.rank_key >= props[i].proposal.rank_key);

  const FrontParams missing{{{"scale_9/pairs", 3}}, ""};
  CHECK_THROWS_AS(propose(set, &missing, nullptr, c, 0), ParameterError);
  const FrontParams some{{{"multiscale/singletons", 4}, {"scale_1/pairs", 2}}, ""};
  CHECK(propose(set, &some, nullptr, c, 0).size() <= 6);
  CHECK_THROWS_AS(masks(Proposal{9, {0}, 0}), ParameterError);
}

TEST_CASE("proposal files") {
  const std::vector<RankedProposal> props{{{0, {3}, 0.5}, 0.75}, {{1, {1, 2}, 0.25}, std::nullopt}};
  const std::string text = proposals_to_jsonl(props);
  CHECK(text.find("\"rank\":1") != std::string::npos);
  const auto back = proposals_from_jsonl(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].proposal.nodes == std::vector<int>{3});
  CHECK(back[0].score == 0.75);
  CHECK_FALSE(back[1].score.has_value());
  CHECK_THROWS_AS(proposals_from_jsonl("{\"nodes\": 3}\n"), FormatError);

  std::mt19937_64 rng(13);
  const auto scene = synthetic::rectangles(rng, {16, 16}, 4);
  const PipelineConfig c = small_config();
  const HierarchySet set = segment_image(scene.image, c);
  const fs::path dir = scratch("props");
  write_hierarchies(set, dir / "h");
  const HierarchySet loaded = load_hierarchies({dir / "h"});
  const auto made = propose(loaded, nullptr, nullptr, c, 20);
  write_proposals(made, loaded.files, dir / "p.jsonl");
  CHECK(fs::exists(dir / "p.jsonl.hier"));
  const LoadedProposals lp = read_proposals(dir / "p.jsonl");
  CHECK(lp.proposals.size() == made.size());
  const auto masks = proposal_masks(lp);
  const MaskBuilder direct(loaded);
  for (std::size_t i = 0; i < made.size(); ++i) CHECK(masks[i] == direct(made[i].proposal));

  // Moving the whole directory keeps the references valid.
  fs::rename(dir, fs::temp_directory_path() / "mcg_test_pipeline_props_moved");
  const fs::path moved = fs::temp_directory_path() / "mcg_test_pipeline_props_moved";
  CHECK(read_proposals(moved / "p.jsonl").proposals.size() == made.size());
  fs::remove_all(moved);
}

TEST_CASE("learning on a small corpus") {
  std::mt19937_64 rng(17);
  PipelineConfig c = small_config();
  c.working_point = {WorkingTarget::Kind::Count, 60};
  std::vector<TrainingImage> corpus;
  for (int i = 0; i < 3; ++i) {
    auto scene = synthetic::rectangles(rng, {20, 20}, 5);
    corpus.push_back({"img" + std::to_string(i), segment_image(scene.image, c), scene.gt});
  }
  const LearnResult r = learn(corpus, c);
  const std::size_t lists = build_ranked_lists(corpus[0].hierarchies, c).size();
  CHECK(r.evaluations == (lists - 1) * c.s_samples * c.s_samples);
  CHECK_FALSE(r.front.empty());
  CHECK(r.selection.point.n_proposals <= 60);
  CHECK(r.params.lists.size() == lists);
  CHECK(r.params.config_hash == config_hash(c));
  CHECK(r.validation_mae.has_value());

  const OverlapRegressor reg = regressor_from_json(regressor_to_json(r.regressor, c));
  const auto props = propose(corpus[0].hierarchies, &r.params, &reg, c, 0);
  CHECK_FALSE(props.empty());
  for (const auto& p : props) {
    REQUIRE(p.score.has_value());
    CHECK(*p.score >= 0.0);
    CHECK(*p.score <= 1.0);
  }

  std::vector<TrainingImage> bad{corpus[0]};
  bad[0].gt.dims = {3, 3};
  bad[0].gt.ids.assign(9, 1);
  CHECK_THROWS_AS(learn(bad, c), ParameterError);
}

TEST_CASE("manifests") {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "m.tsv") << "# comment\n\na.ppm\tgt/a.pgm\n/abs/b.ppm\tb.pgm\n";
  const auto rows = read_manifest(dir / "m.tsv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == dir / "a.ppm");
  CHECK(rows[0].second == dir / "gt/a.pgm");
  CHECK(rows[1].first == fs::path("/abs/b.ppm"));
  std::ofstream(dir / "bad.tsv") << "only-one-column\n";
  CHECK_THROWS_AS(read_manifest(dir / "bad.tsv"), FormatError);
}

TEST_CASE("boxes and counts") {
  BinaryMask a({4, 4}), b({4, 4});
  a.set(1, 1);
  a.set(2, 3);
  b.set(1, 1);
  b.set(2, 3);
  b.set(2, 2);
  const auto boxes = proposal_boxes(std::vector<BinaryMask>{a, b});
  CHECK(boxes == std::vector<BBox>{BBox{1, 1, 2, 3}});
  CHECK(boxes_to_csv(boxes) == "y_min,x_min,y_max,x_max\n1,1,2,3\n");
  CHECK(default_counts(0) == std::vector<std::size_t>{0});
  const auto counts = default_counts(1000);
  CHECK(counts.front() == 0);
  CHECK(counts.back() == 1000);
  CHECK(std::adjacent_find(counts.begin(), counts.end()) == counts.end());
}
