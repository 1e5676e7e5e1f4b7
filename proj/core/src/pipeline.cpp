#include "mcg/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "mcg/affinity.hpp"
#include "mcg/dncuts.hpp"
#include "mcg/error.hpp"
#include "mcg/eval.hpp"
#include "mcg/hierarchy.hpp"
#include "mcg/io.hpp"

namespace mcg {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ParameterError("config." + field + ": " + why);
  };
  if (c.scales.empty()) fail("scales", "at least one scale required");
  std::set<double> distinct;
  for (double s : c.scales) {
    if (!(s > 0.0 && s <= 8.0)) fail("scales", "each scale must lie in (0,8]");
    if (!distinct.insert(s).second) fail("scales", "scales must be distinct");
  }
  if (c.dncuts_d < 0 || c.dncuts_d > 8) fail("dncuts_d", "must lie in 0..8");
  if (c.dncuts_k < 1) fail("dncuts_k", "must be >= 1");
  if (c.affinity_radius < 1) fail("affinity_radius", "must be >= 1");
  if (!(c.affinity_sigma > 0.0)) fail("affinity_sigma", "must be > 0");
  if (c.cue_radii.empty()) fail("cue_radii", "at least one radius required");
  for (int r : c.cue_radii) {
    if (r < 1) fail("cue_radii", "each radius must be >= 1");
  }
  if (!(c.local_weight >= 0.0) || !(c.spectral_weight >= 0.0)) fail("local_weight", "cue weights must be >= 0");
  if (c.local_weight + c.spectral_weight <= 0.0) fail("local_weight", "cue weights must not both be 0");
  if (!std::isfinite(c.calibration.a) || !std::isfinite(c.calibration.b)) fail("calibration", "constants must be finite");
  if (c.node_budget < 1) fail("node_budget", "must be >= 1");
  if (c.max_tuple < 1 || c.max_tuple > 4) fail("max_tuple", "must lie in 1..4");
  if (c.s_samples < 2) fail("s_samples", "must be >= 2");
  if (!(c.mmr_lambda >= 0.0 && c.mmr_lambda <= 1.0)) fail("mmr_lambda", "must lie in [0,1]");
  if (!(c.dedup_threshold > 0.0 && c.dedup_threshold <= 1.0)) fail("dedup_threshold", "must lie in (0,1]");
  if (!(c.working_point.value >= 0.0)) fail("working_point", "value must be >= 0");
  if (c.working_point.kind == WorkingTarget::Kind::Quality && c.working_point.value > 1.0) {
    fail("working_point", "quality target must be <= 1");
  }
  if (c.forest_trees < 1) fail("forest_trees", "must be >= 1");
  if (c.forest_depth < 0) fail("forest_depth", "must be >= 0");
}

json config_to_json(const PipelineConfig& c) {
  return {
      {"scales", c.scales},
      {"dncuts_d", c.dncuts_d},
      {"dncuts_k", c.dncuts_k},
      {"affinity_radius", c.affinity_radius},
      {"affinity_sigma", c.affinity_sigma},
      {"cue_radii", c.cue_radii},
      {"local_weight", c.local_weight},
      {"spectral_weight", c.spectral_weight},
      {"calibration", {{"enabled", c.calibration.enabled}, {"a", c.calibration.a}, {"b", c.calibration.b}}},
      {"node_budget", c.node_budget},
      {"max_tuple", c.max_tuple},
      {"max_per_list", c.max_per_list},
      {"s_samples", c.s_samples},
      {"mmr_lambda", c.mmr_lambda},
      {"dedup_threshold", c.dedup_threshold},
      {"working_point",
       {{"kind", c.working_point.kind == WorkingTarget::Kind::Count ? "count" : "quality"},
        {"value", c.working_point.value}}},
      {"forest_trees", c.forest_trees},
      {"forest_depth", c.forest_depth},
      {"seed", c.seed},
  };
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "scales") c.scales = v.get<std::vector<double>>();
      else if (key == "dncuts_d") c.dncuts_d = v.get<int>();
      else if (key == "dncuts_k") c.dncuts_k = v.get<int>();
      else if (key == "affinity_radius") c.affinity_radius = v.get<int>();
      else if (key == "affinity_sigma") c.affinity_sigma = v.get<double>();
      else if (key == "cue_radii") c.cue_radii = v.get<std::vector<int>>();
      else if (key == "local_weight") c.local_weight = v.get<double>();
      else if (key == "spectral_weight") c.spectral_weight = v.get<double>();
      else if (key == "calibration") {
        c.calibration.enabled = v.value("enabled", c.calibration.enabled);
        c.calibration.a = v.value("a", c.calibration.a);
        c.calibration.b = v.value("b", c.calibration.b);
      } else if (key == "node_budget") c.node_budget = v.get<std::size_t>();
      else if (key == "max_tuple") c.max_tuple = v.get<int>();
      else if (key == "max_per_list") c.max_per_list = v.get<std::size_t>();
      else if (key == "s_samples") c.s_samples = v.get<std::size_t>();
      else if (key == "mmr_lambda") c.mmr_lambda = v.get<double>();
      else if (key == "dedup_threshold") c.dedup_threshold = v.get<double>();
      else if (key == "working_point") {
        const auto kind = v.at("kind").get<std::string>();
        if (kind == "count") c.working_point.kind = WorkingTarget::Kind::Count;
        else if (kind == "quality") c.working_point.kind = WorkingTarget::Kind::Quality;
        else throw ParameterError("config.working_point.kind must be \"count\" or \"quality\"");
        c.working_point.value = v.at("value").get<double>();
      } else if (key == "forest_trees") c.forest_trees = v.get<int>();
      else if (key == "forest_depth") c.forest_depth = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ParameterError("config: unknown key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- segment

Image resample_bilinear(const Image& img, Dims target) {
  if (target.height < 1 || target.width < 1) throw ParameterError("resample: target must be non-empty");
  if (target == img.dims) return img;
  Image out{target, img.channels, std::vector<double>(target.size() * static_cast<std::size_t>(img.channels))};
  const double sy = static_cast<double>(img.dims.height) / target.height;
  const double sx = static_cast<double>(img.dims.width) / target.width;
  for (int y = 0; y < target.height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.dims.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.dims.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target.width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.dims.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.dims.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bottom = (1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        out.data[target.index(y, x) * static_cast<std::size_t>(img.channels) + static_cast<std::size_t>(c)] =
            (1 - wy) * top + wy * bottom;
      }
    }
  }
  return out;
}

ContourMap contour_cue(const Image& img, const PipelineConfig& config) {
  const Dims dims = img.dims;
  const int side = std::min(dims.height, dims.width);
  std::vector<int> radii;
  for (int r : config.cue_radii) {
    if (r <= side) radii.push_back(r);
  }
  if (radii.empty()) radii.push_back(1);
  ContourMap cue = local_contour_cue(img, radii);

  const auto n = static_cast<int>(dims.size());
  if (config.spectral_weight > 0.0 && n >= 3) {
    const SparseAffinity a = build_affinity(cue, config.affinity_radius, config.affinity_sigma);
    const int k = std::min(config.dncuts_k, n - 1);
    // Fewer decimation steps when the coarse grid would hold fewer than k+1 pixels.
    int d = config.dncuts_d;
    for (; d > 0; --d) {
      Dims coarse = dims;
      for (int i = 0; i < d; ++i) coarse = Dims{(coarse.height + 1) / 2, (coarse.width + 1) / 2};
      if (static_cast<int>(coarse.size()) >= k + 1) break;
    }
    NcutsOptions options;
    options.seed = config.seed;
    const EigenBasis basis = dncuts(a, d, k, dims, options);
    const std::vector<double> weights(static_cast<std::size_t>(basis.k()), 1.0);
    const ContourMap spectral = spectral_gradients(basis, dims, weights);
    for (std::size_t i = 0; i < cue.data().size(); ++i) {
      cue.data()[i] = config.local_weight * cue.data()[i] + config.spectral_weight * spectral.data()[i];
    }
  } else {
    for (double& v : cue.data()) v *= config.local_weight;
  }
  for (double& v : cue.data()) v = std::clamp(v, 0.0, 1.0);
  return cue;
}

Ucm segment_single_scale(const Image& img, const PipelineConfig& config) {
  const ContourMap cue = contour_cue(img, config);
  return build_ucm(finest_partition(cue), cue);
}

std::string scale_name(double scale) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, scale);
  return "scale_" + std::string(buf, res.ptr);
}

HierarchySet segment_image(const Image& img, const PipelineConfig& config) {
  validate(config);
  std::vector<Ucm> per_scale;
  std::size_t finest_scale = 0;
  for (std::size_t i = 0; i < config.scales.size(); ++i) {
    const double s = config.scales[i];
    const Dims dims{std::max(1, static_cast<int>(std::lround(img.dims.height * s))),
                    std::max(1, static_cast<int>(std::lround(img.dims.width * s)))};
    try {
      per_scale.push_back(segment_single_scale(resample_bilinear(img, dims), config));
    } catch (const Error& e) {
      throw ParameterError("scale " + scale_name(s).substr(6) + ": " + e.what());
    }
    if (s > config.scales[finest_scale]) finest_scale = i;
  }

  // Coarse to fine onto the highest-resolution superpixels, then combine.
  const LabelMap target = per_scale[finest_scale].finest;
  std::vector<std::size_t> order(per_scale.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return config.scales[a] < config.scales[b]; });
  std::vector<Ucm> aligned(per_scale.size());
  for (std::size_t i : order) aligned[i] = align_ucm(per_scale[i], target);
  const std::vector<double> weights(aligned.size(), 1.0 / static_cast<double>(aligned.size()));
  const Ucm multi = multiscale_combine(aligned, weights, config.calibration);

  // Everything ends on superpixels at image resolution so masks match annotations.
  const LabelMap image_sp = split_components(rescale_segmentation(target, img.dims));
  HierarchySet out;
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    out.names.push_back(scale_name(config.scales[i]));
    out.ucms.push_back(align_ucm(aligned[i], image_sp));
  }
  out.names.push_back("multiscale");
  out.ucms.push_back(align_ucm(multi, image_sp));
  return out;
}

void write_hierarchies(const HierarchySet& set, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::string listing;
  for (std::size_t i = 0; i < set.ucms.size(); ++i) {
    const std::string file = set.names[i] + ".ucm";
    save_ucm(set.ucms[i], dir / file);
    listing += file + "\n";
  }
  write_file_atomic(dir / "hierarchies.txt", listing);
}

namespace {

std::vector<fs::path> read_listing(const fs::path& listing) {
  std::istringstream in(read_file(listing));
  std::vector<fs::path> files;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fs::path p(line);
    files.push_back(p.is_absolute() ? p : listing.parent_path() / p);
  }
  return files;
}

}  // namespace

HierarchySet load_hierarchies(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in)) {
      for (auto& f : read_listing(in / "hierarchies.txt")) files.push_back(std::move(f));
    } else if (in.extension() == ".txt") {
      for (auto& f : read_listing(in)) files.push_back(std::move(f));
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw ParameterError("no hierarchy files given");
  HierarchySet set;
  for (const fs::path& f : files) {
    set.names.push_back(f.stem().string());
    set.ucms.push_back(load_ucm(f));
    set.files.push_back(f);
  }
  return set;
}

// ---------------------------------------------------------------- propose

std::vector<RankedList> build_ranked_lists(const HierarchySet& set, const PipelineConfig& config) {
  std::vector<std::vector<RankedList>> per_h;
  for (std::size_t h = 0; h < set.ucms.size(); ++h) {
    const Ucm& u = set.ucms[h];
    const double floor = default_strength_floor(u, config.node_budget);
    auto lists = enumerate_tuples(Dendrogram(u), compute_neighbors(u, floor), config.max_tuple, static_cast<int>(h));
    for (RankedList& l : lists) {
      l.id = set.names[h] + "/" + l.id;
      if (config.max_per_list > 0 && l.proposals.size() > config.max_per_list) l.proposals.resize(config.max_per_list);
    }
    per_h.push_back(std::move(lists));
  }
  std::vector<RankedList> out;
  for (int t = 0; t < config.max_tuple; ++t) {
    for (auto& lists : per_h) out.push_back(std::move(lists[static_cast<std::size_t>(t)]));
  }
  return out;
}

MaskBuilder::MaskBuilder(const HierarchySet& set) : set_(&set) {
  trees_.reserve(set.ucms.size());
  for (const Ucm& u : set.ucms) trees_.emplace_back(u);
}

BinaryMask MaskBuilder::operator()(const Proposal& p) const {
  if (p.hierarchy < 0 || static_cast<std::size_t>(p.hierarchy) >= trees_.size()) {
    throw ParameterError("proposal references hierarchy " + std::to_string(p.hierarchy) + " which does not exist");
  }
  const auto h = static_cast<std::size_t>(p.hierarchy);
  return proposal_mask(p, trees_[h], set_->ucms[h].finest);
}

std::vector<RankedProposal> propose(const HierarchySet& set, const FrontParams* params,
                                    const OverlapRegressor* regressor, const PipelineConfig& config,
                                    std::size_t top) {
  validate(config);
  const auto lists = build_ranked_lists(set, config);
  const MaskBuilder masks(set);

  Pool pool;
  if (params != nullptr) {
    std::map<std::string, std::size_t> wanted;
    for (const auto& l : params->lists) wanted[l.id] = l.n;
    std::vector<std::size_t> counts(lists.size(), 0);
    for (std::size_t r = 0; r < lists.size(); ++r) {
      auto it = wanted.find(lists[r].id);
      if (it == wanted.end()) continue;
      counts[r] = it->second;
      wanted.erase(it);
    }
    if (!wanted.empty()) throw ParameterError("front params reference missing list \"" + wanted.begin()->first + "\"");
    pool = combine_at(counts, lists, masks, config.dedup_threshold);
  } else {
    std::vector<Proposal> all;
    for (const auto& l : lists) all.insert(all.end(), l.proposals.begin(), l.proposals.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const Proposal& a, const Proposal& b) { return a.rank_key > b.rank_key; });
    const RankedList merged{"all", 0, 1, std::move(all)};
    const std::size_t n = merged.proposals.size();
    pool = combine_at(std::span<const std::size_t>(&n, 1), std::span<const RankedList>(&merged, 1), masks,
                      config.dedup_threshold);
  }

  std::vector<RankedProposal> out;
  if (regressor != nullptr) {
    std::map<int, RegionTree> trees;
    std::vector<double> scores;
    scores.reserve(pool.proposals.size());
    for (const Proposal& p : pool.proposals) {
      auto it = trees.find(p.hierarchy);
      if (it == trees.end()) {
        const Ucm& u = set.ucms[static_cast<std::size_t>(p.hierarchy)];
        it = trees.emplace(p.hierarchy, RegionTree(u, default_strength_floor(u, config.node_budget))).first;
      }
      scores.push_back(regressor->predict(compute_features(p, it->second)));
    }
    for (std::size_t i : mmr_order(scores, pool.masks, config.mmr_lambda)) {
      out.push_back({pool.proposals[i], scores[i]});
    }
  } else {
    for (auto& p : pool.proposals) out.push_back({std::move(p), std::nullopt});
  }
  if (top > 0 && out.size() > top) out.resize(top);
  return out;
}

std::string proposals_to_jsonl(const std::vector<RankedProposal>& proposals) {
  std::string out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& rp = proposals[i];
    json j;
    j["hierarchy"] = rp.proposal.hierarchy;
    j["nodes"] = rp.proposal.nodes;
    j["rank"] = i + 1;
    j["score"] = rp.score ? json(*rp.score) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RankedProposal> proposals_from_jsonl(const std::string& text) {
  std::vector<std::pair<long, RankedProposal>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      RankedProposal rp;
      rp.proposal.hierarchy = j.at("hierarchy").get<int>();
      rp.proposal.nodes = j.at("nodes").get<std::vector<int>>();
      if (rp.proposal.nodes.empty() || rp.proposal.nodes.size() > 4) {
        throw FormatError("proposal must name 1-4 nodes");
      }
      std::sort(rp.proposal.nodes.begin(), rp.proposal.nodes.end());
      if (!j.at("score").is_null()) rp.score = j.at("score").get<double>();
      rows.emplace_back(j.at("rank").get<long>(), std::move(rp));
    } catch (const json::exception& e) {
      throw FormatError("proposals line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("proposals line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<RankedProposal> out;
  for (auto& r : rows) out.push_back(std::move(r.second));
  return out;
}

void write_proposals(const std::vector<RankedProposal>& proposals, const std::vector<fs::path>& hierarchy_files,
                     const fs::path& out) {
  const fs::path base = fs::absolute(out).parent_path();
  std::string listing;
  for (const fs::path& f : hierarchy_files) {
    listing += fs::absolute(f).lexically_normal().lexically_relative(base).generic_string() + "\n";
  }
  write_file_atomic(out, proposals_to_jsonl(proposals));
  fs::path sidecar = out;
  sidecar += ".hier";
  write_file_atomic(sidecar, listing);
}

LoadedProposals read_proposals(const fs::path& path) {
  LoadedProposals out;
  out.proposals = proposals_from_jsonl(read_file(path));
  fs::path sidecar = path;
  sidecar += ".hier";
  out.hierarchies = load_hierarchies(read_listing(sidecar));
  return out;
}

std::vector<BinaryMask> proposal_masks(const LoadedProposals& loaded) {
  const MaskBuilder build(loaded.hierarchies);
  std::vector<BinaryMask> masks;
  masks.reserve(loaded.proposals.size());
  for (const auto& rp : loaded.proposals) masks.push_back(build(rp.proposal));
  return masks;
}

// ---------------------------------------------------------------- learn

namespace {

OverlapRegressor fit(const std::vector<FeatureVector>& x, const std::vector<double>& y, const PipelineConfig& c) {
  ForestConfig f;
  f.trees = c.forest_trees;
  f.max_depth = c.forest_depth;
  f.seed = c.seed;
  return train_regressor(x, y, f);
}

}  // namespace

LearnResult learn(const std::vector<TrainingImage>& corpus, const PipelineConfig& config) {
  validate(config);
  if (corpus.empty()) throw ParameterError("learn: empty corpus");

  std::vector<std::vector<RankedList>> lists;
  ParetoCorpus pc;
  std::vector<BinaryMask> instance_masks;
  for (const TrainingImage& img : corpus) {
    for (const Ucm& u : img.hierarchies.ucms) {
      if (!(u.finest.dims == img.gt.dims)) {
        throw ParameterError("image " + img.name + ": hierarchy and ground truth dimensions differ");
      }
    }
    if (img.gt.ids.size() != img.gt.dims.size()) throw ParameterError("image " + img.name + ": malformed ground truth");
    lists.push_back(build_ranked_lists(img.hierarchies, config));
    if (lists.back().size() != lists.front().size()) {
      throw ParameterError("image " + img.name + ": hierarchy count differs from the first image");
    }
    for (std::size_t r = 0; r < lists.back().size(); ++r) {
      if (lists.back()[r].id != lists.front()[r].id) {
        throw ParameterError("image " + img.name + ": list " + lists.back()[r].id + " does not match " +
                             lists.front()[r].id);
      }
    }
  }

  pc.list_count = lists.front().size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const MaskBuilder masks(corpus[i].hierarchies);
    pc.instance_counts.push_back(corpus[i].gt.instance_count());
    std::vector<std::vector<std::vector<double>>> per_list;
    for (const RankedList& l : lists[i]) {
      std::vector<BinaryMask> m;
      m.reserve(l.proposals.size());
      for (const Proposal& p : l.proposals) m.push_back(masks(p));
      per_list.push_back(overlap_matrix(m, corpus[i].gt));
    }
    pc.overlaps.push_back(std::move(per_list));
  }

  LearnResult result;
  if (pc.list_count >= 2) {
    FrontResult fr = greedy_front_combine(pc, config.s_samples);
    result.front = std::move(fr.front);
    result.evaluations = fr.evaluations;
  } else {
    const auto levels = geometric_levels(pc.list_length(0), config.s_samples);
    const auto curve = list_quality_curve(pc, 0, levels);
    result.front = pareto_filter(curve);
    result.evaluations = levels.size();
  }
  result.selection = select_working_point(result.front, config.working_point);
  result.params.config_hash = config_hash(config);
  for (std::size_t r = 0; r < pc.list_count; ++r) {
    result.params.lists.push_back({lists.front()[r].id, result.selection.point.params[r]});
  }

  // Regressor rows: every proposal of each image's combined pool.
  std::vector<std::vector<FeatureVector>> x(corpus.size());
  std::vector<std::vector<double>> y(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& set = corpus[i].hierarchies;
    const MaskBuilder masks(set);
    const Pool pool = combine_at(result.selection.point.params, lists[i], masks, config.dedup_threshold);
    std::vector<RegionTree> trees;
    for (const Ucm& u : set.ucms) trees.emplace_back(u, default_strength_floor(u, config.node_budget));
    const auto overlaps = overlap_matrix(pool.masks, corpus[i].gt);
    for (std::size_t p = 0; p < pool.proposals.size(); ++p) {
      const Proposal& prop = pool.proposals[p];
      x[i].push_back(compute_features(prop, trees[static_cast<std::size_t>(prop.hierarchy)]));
      y[i].push_back(overlaps[p].empty() ? 0.0 : *std::max_element(overlaps[p].begin(), overlaps[p].end()));
    }
  }
  auto gather = [&](int parity) {
    std::pair<std::vector<FeatureVector>, std::vector<double>> rows;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (parity >= 0 && static_cast<int>(i % 2) != parity) continue;
      rows.first.insert(rows.first.end(), x[i].begin(), x[i].end());
      rows.second.insert(rows.second.end(), y[i].begin(), y[i].end());
    }
    return rows;
  };
  const auto all = gather(-1);
  if (all.first.empty()) throw ParameterError("learn: the selected working point yields no proposals to train on");
  if (corpus.size() >= 2) {
    const auto train = gather(0);
    const auto held = gather(1);
    if (!train.first.empty() && !held.first.empty()) {
      result.validation_mae = mean_absolute_error(fit(train.first, train.second, config), held.first, held.second);
    }
  }
  result.regressor = fit(all.first, all.second, config);
  return result;
}

std::string regressor_to_json(const OverlapRegressor& reg, const PipelineConfig& config) {
  json j = reg.to_json();
  j["config"] = config_to_json(config);
  j["seed"] = config.seed;
  return j.dump();
}

OverlapRegressor regressor_from_json(const std::string& text) {
  try {
    return OverlapRegressor::from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("regressor: ") + e.what());
  }
}

std::vector<std::pair<fs::path, fs::path>> read_manifest(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<fs::path, fs::path>> out;
  std::string line;
  std::size_t line_no = 0;
  auto resolve = [&](const std::string& s) {
    fs::path p(s);
    return p.is_absolute() ? p : path.parent_path() / p;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected two tab-separated paths");
    }
    out.emplace_back(resolve(line.substr(0, tab)), resolve(line.substr(tab + 1)));
  }
  return out;
}

// ---------------------------------------------------------------- boxes / eval

std::vector<BBox> proposal_boxes(const std::vector<BinaryMask>& masks) {
  std::vector<BBox> out;
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& m : masks) {
    const BBox b = m.bbox();
    if (seen.insert({b.row_min, b.col_min, b.row_max, b.col_max}).second) out.push_back(b);
  }
  return out;
}

std::string boxes_to_csv(const std::vector<BBox>& boxes) {
  std::string out = "y_min,x_min,y_max,x_max\n";
  for (const BBox& b : boxes) {
    out += std::to_string(b.row_min) + "," + std::to_string(b.col_min) + "," + std::to_string(b.row_max) + "," +
           std::to_string(b.col_max) + "\n";
  }
  return out;
}

std::vector<std::size_t> default_counts(std::size_t max) {
  if (max == 0) return {0};
  auto levels = geometric_levels(max, 12);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

}  // namespace mcg
