#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mcg/align.hpp"
#include "mcg/grouping.hpp"
#include "mcg/pareto.hpp"
#include "mcg/rank.hpp"
#include "mcg/types.hpp"

namespace mcg {

struct PipelineConfig {
  std::vector<double> scales{0.5, 1.0, 2.0};
  int dncuts_d = 2;
  int dncuts_k = 16;
  int affinity_radius = 5;
  double affinity_sigma = 0.1;
  std::vector<int> cue_radii{1, 2, 4};
  double local_weight = 0.5;
  double spectral_weight = 0.5;
  Calibration calibration;
  std::size_t node_budget = 200;
  int max_tuple = 4;
  std::size_t max_per_list = 500;  ///< 0 keeps every enumerated tuple
  std::size_t s_samples = 10;
  double mmr_lambda = 0.1;
  double dedup_threshold = 0.95;
  WorkingTarget working_point{WorkingTarget::Kind::Count, 1000.0};
  int forest_trees = 50;
  int forest_depth = 12;
  std::uint64_t seed = 0;
};

/// Throws ParameterError naming the first out-of-range field.
void validate(const PipelineConfig& config);
nlohmann::json config_to_json(const PipelineConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

/// Bilinear resampling with pixel centres aligned.
Image resample_bilinear(const Image& img, Dims target);

/// Combined local + spectral contour cue of one image.
ContourMap contour_cue(const Image& img, const PipelineConfig& config);
/// Hierarchy of one image at its own resolution.
Ucm segment_single_scale(const Image& img, const PipelineConfig& config);

/// Every hierarchy of one image, all over the same image-resolution
/// superpixels: one per scale, then the multiscale combination.
struct HierarchySet {
  std::vector<std::string> names;  ///< "scale_<s>", ..., "multiscale"
  std::vector<Ucm> ucms;
  std::vector<std::filesystem::path> files;  ///< source files when loaded from disk
};

std::string scale_name(double scale);
HierarchySet segment_image(const Image& img, const PipelineConfig& config);

/// Writes <name>.ucm per hierarchy plus hierarchies.txt listing them.
void write_hierarchies(const HierarchySet& set, const std::filesystem::path& dir);
/// Accepts .ucm files, directories holding hierarchies.txt, or that file
/// itself; expanded in order.
HierarchySet load_hierarchies(const std::vector<std::filesystem::path>& inputs);

/// Ranked lists of every hierarchy, ordered by tuple size then hierarchy.
/// List ids are "<hierarchy name>/<tuple name>".
std::vector<RankedList> build_ranked_lists(const HierarchySet& set, const PipelineConfig& config);

/// Mask builder over a hierarchy set, caching one dendrogram per hierarchy.
class MaskBuilder {
 public:
  explicit MaskBuilder(const HierarchySet& set);
  BinaryMask operator()(const Proposal& p) const;

 private:
  const HierarchySet* set_;
  std::vector<Dendrogram> trees_;
};

struct RankedProposal {
  Proposal proposal;
  std::optional<double> score;
};

/// Lists -> combine_at (params, or every list stably merged by rank_key)
/// -> dedup -> optional regressor + MMR -> first `top` entries (0 = all).
std::vector<RankedProposal> propose(const HierarchySet& set, const FrontParams* params,
                                    const OverlapRegressor* regressor, const PipelineConfig& config,
                                    std::size_t top = 0);

std::string proposals_to_jsonl(const std::vector<RankedProposal>& proposals);
std::vector<RankedProposal> proposals_from_jsonl(const std::string& text);

/// Proposals file plus the "<file>.hier" sidecar naming its hierarchies.
void write_proposals(const std::vector<RankedProposal>& proposals, const std::vector<std::filesystem::path>& hierarchy_files,
                     const std::filesystem::path& out);

struct LoadedProposals {
  std::vector<RankedProposal> proposals;
  HierarchySet hierarchies;
};
LoadedProposals read_proposals(const std::filesystem::path& path);
/// Masks in rank order; throws ParameterError for a stale reference.
std::vector<BinaryMask> proposal_masks(const LoadedProposals& loaded);

struct LearnResult {
  FrontParams params;
  OverlapRegressor regressor;
  std::vector<ParetoPoint> front;
  Selection selection;
  std::size_t evaluations = 0;
  std::optional<double> validation_mae;
};

/// One training image: its hierarchies and instance annotation.
struct TrainingImage {
  std::string name;
  HierarchySet hierarchies;
  InstanceGroundTruth gt;
};

LearnResult learn(const std::vector<TrainingImage>& corpus, const PipelineConfig& config);

std::string regressor_to_json(const OverlapRegressor& reg, const PipelineConfig& config);
OverlapRegressor regressor_from_json(const std::string& text);

/// Manifest lines "first<TAB>second"; blank lines and '#' comments skipped,
/// relative paths resolved against the manifest's directory.
std::vector<std::pair<std::filesystem::path, std::filesystem::path>> read_manifest(const std::filesystem::path& path);

/// Bounding boxes of proposals in rank order, exact duplicates removed.
std::vector<BBox> proposal_boxes(const std::vector<BinaryMask>& masks);
std::string boxes_to_csv(const std::vector<BBox>& boxes);

/// Default evaluation counts: distinct geometric levels up to `max`.
std::vector<std::size_t> default_counts(std::size_t max);

}  // namespace mcg
