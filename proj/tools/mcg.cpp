// Command-line front end: segment, propose, learn, eval, boxes.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcg/error.hpp"
#include "mcg/eval.hpp"
#include "mcg/io.hpp"
#include "mcg/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON pipeline configuration");
  cmd->add_option("--seed", c.seed, "override the configured seed");
  cmd->add_option("--out", c.out, "output path");
}

mcg::PipelineConfig resolve_config(const Common& c) {
  mcg::PipelineConfig config = c.config.empty() ? mcg::PipelineConfig{} : mcg::load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  mcg::validate(config);
  return config;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    mcg::write_file_atomic(out, text);
  }
}

bool is_hierarchy_input(const fs::path& p) {
  return fs::is_directory(p) || p.extension() == ".txt" || p.extension() == ".ucm";
}

int run_segment(const std::string& image, const Common& c) {
  const auto config = resolve_config(c);
  const fs::path dir = c.out.empty() ? fs::path(image + ".mcg") : fs::path(c.out);
  const auto set = mcg::segment_image(mcg::load_image(image), config);
  mcg::write_hierarchies(set, dir);
  std::cerr << "wrote " << set.ucms.size() << " hierarchies to " << dir.string() << "\n";
  return 0;
}

int run_propose(const std::vector<std::string>& inputs, const std::string& params_path,
                const std::string& regressor_path, std::size_t top, const Common& c) {
  const auto config = resolve_config(c);
  if (c.out.empty()) throw mcg::ParameterError("propose: --out is required");
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const auto set = mcg::load_hierarchies(paths);
  std::optional<mcg::FrontParams> params;
  if (!params_path.empty()) params = mcg::front_params_from_json(mcg::read_file(params_path));
  std::optional<mcg::OverlapRegressor> reg;
  if (!regressor_path.empty()) reg = mcg::regressor_from_json(mcg::read_file(regressor_path));
  const auto proposals = mcg::propose(set, params ? &*params : nullptr, reg ? &*reg : nullptr, config, top);
  mcg::write_proposals(proposals, set.files, c.out);
  std::cerr << "wrote " << proposals.size() << " proposals to " << c.out << "\n";
  return 0;
}

int run_learn(const std::string& manifest, const Common& c) {
  const auto config = resolve_config(c);
  if (c.out.empty()) throw mcg::ParameterError("learn: --out is required");
  const auto entries = mcg::read_manifest(manifest);
  if (entries.empty()) throw mcg::ParameterError("learn: empty manifest");
  std::vector<mcg::TrainingImage> corpus;
  for (const auto& [first, gt] : entries) {
    mcg::TrainingImage img;
    img.name = first.string();
    img.hierarchies = is_hierarchy_input(first) ? mcg::load_hierarchies({first})
                                                : mcg::segment_image(mcg::load_image(first), config);
    img.gt = mcg::load_ground_truth(gt);
    corpus.push_back(std::move(img));
  }
  const auto result = mcg::learn(corpus, config);
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw mcg::IoError("cannot create " + dir.string() + ": " + ec.message());
  mcg::write_file_atomic(dir / "front_params.json", mcg::front_params_to_json(result.params));
  mcg::write_file_atomic(dir / "regressor.json", mcg::regressor_to_json(result.regressor, config));
  std::cerr << "front points: " << result.front.size() << ", quality evaluations: " << result.evaluations << "\n";
  std::cerr << "working point: n=" << result.selection.point.n_proposals << " quality=" << result.selection.point.quality
            << "\n";
  if (result.selection.warning) std::cerr << "warning: working-point target not reachable; using nearest point\n";
  if (result.validation_mae) std::cerr << "held-out mean absolute error: " << *result.validation_mae << "\n";
  return 0;
}

int run_eval(const std::string& proposals, const std::string& gt, const std::string& manifest,
             std::vector<std::size_t> counts, const Common& c) {
  std::vector<std::pair<fs::path, fs::path>> entries;
  if (!manifest.empty()) {
    entries = mcg::read_manifest(manifest);
  } else {
    if (proposals.empty() || gt.empty()) throw mcg::ParameterError("eval: give PROPOSALS --gt GT, or --manifest");
    entries.emplace_back(proposals, gt);
  }
  if (entries.empty()) throw mcg::ParameterError("eval: empty manifest");
  std::vector<std::vector<mcg::BinaryMask>> pools;
  std::vector<mcg::InstanceGroundTruth> gts;
  std::size_t longest = 0;
  for (const auto& [p, g] : entries) {
    const auto loaded = mcg::read_proposals(p);
    pools.push_back(mcg::proposal_masks(loaded));
    gts.push_back(mcg::load_ground_truth(g));
    for (const auto& m : pools.back()) {
      if (!(m.dims() == gts.back().dims)) {
        throw mcg::ParameterError(p.string() + ": proposal dimensions differ from ground truth " + g.string());
      }
    }
    longest = std::max(longest, pools.back().size());
  }
  if (counts.empty()) counts = mcg::default_counts(longest);
  std::sort(counts.begin(), counts.end());
  std::vector<mcg::PoolView> corpus;
  for (std::size_t i = 0; i < pools.size(); ++i) corpus.push_back({pools[i], &gts[i]});
  const auto curve = mcg::quality_vs_count_curve(corpus, counts);
  emit(c.out, mcg::curve_to_csv(curve));
  auto& report = (c.out.empty() || c.out == "-") ? std::cerr : std::cout;
  const std::size_t last = curve.counts.size() - 1;
  report << "at " << curve.counts[last] << " proposals: J_i=" << curve.j_i[last]
         << " recall@0.5=" << curve.recall_050[last] << " recall@0.7=" << curve.recall_070[last]
         << " recall@0.85=" << curve.recall_085[last] << "\n";
  return 0;
}

int run_boxes(const std::string& proposals, const Common& c) {
  const auto loaded = mcg::read_proposals(proposals);
  emit(c.out, mcg::boxes_to_csv(mcg::proposal_boxes(mcg::proposal_masks(loaded))));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale hierarchical segmentation and object proposals"};
  app.require_subcommand(1);

  Common seg_c, prop_c, learn_c, eval_c, box_c;

  std::string image;
  auto* seg = app.add_subcommand("segment", "build per-scale and multiscale hierarchies for an image");
  seg->add_option("image", image, "PGM/PPM image")->required();
  add_common(seg, seg_c);

  std::vector<std::string> hier;
  std::string params_path, regressor_path;
  std::size_t top = 0;
  auto* prop = app.add_subcommand("propose", "enumerate, combine and rank proposals");
  prop->add_option("hierarchies", hier, ".ucm files, segment directories or hierarchies.txt")->required();
  prop->add_option("--params", params_path, "front params JSON from learn");
  prop->add_option("--regressor", regressor_path, "regressor JSON from learn");
  prop->add_option("--top", top, "keep at most this many proposals");
  add_common(prop, prop_c);

  std::string learn_manifest;
  auto* lrn = app.add_subcommand("learn", "learn front params and the ranking regressor");
  lrn->add_option("manifest", learn_manifest, "lines of image-or-hierarchies<TAB>ground truth")->required();
  add_common(lrn, learn_c);

  std::string eval_props, eval_gt, eval_manifest;
  std::vector<std::size_t> counts;
  auto* ev = app.add_subcommand("eval", "quality versus proposal count");
  ev->add_option("proposals", eval_props, "proposals file");
  ev->add_option("--gt", eval_gt, "ground-truth instances for a single proposals file");
  ev->add_option("--manifest", eval_manifest, "lines of proposals<TAB>ground truth");
  ev->add_option("--counts", counts, "proposal counts to sample")->delimiter(',');
  add_common(ev, eval_c);

  std::string box_props;
  auto* box = app.add_subcommand("boxes", "bounding boxes of ranked proposals");
  box->add_option("proposals", box_props, "proposals file")->required();
  add_common(box, box_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*seg) return run_segment(image, seg_c);
    if (*prop) return run_propose(hier, params_path, regressor_path, top, prop_c);
    if (*lrn) return run_learn(learn_manifest, learn_c);
    if (*ev) return run_eval(eval_props, eval_gt, eval_manifest, counts, eval_c);
    if (*box) return run_boxes(box_props, box_c);
  } catch (const mcg::Error& e) {
    std::cerr << "mcg: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mcg: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
