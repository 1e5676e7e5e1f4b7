#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mcg/grouping.hpp"

namespace mcg {

struct ParetoPoint {
  std::size_t n_proposals = 0;
  double quality = 0.0;
  std::vector<std::size_t> params;  ///< top-N taken from each list

  bool operator==(const ParetoPoint&) const = default;
};

/// Overlap tables of a training corpus: overlaps[image][list][proposal][instance]
/// is the Jaccard of the proposal at that rank with that ground-truth instance.
struct ParetoCorpus {
  std::size_t list_count = 0;
  std::vector<std::size_t> instance_counts;
  std::vector<std::vector<std::vector<std::vector<double>>>> overlaps;

  /// Longest version of list r over the corpus.
  std::size_t list_length(std::size_t r) const;
  std::size_t total_instances() const;
};

struct FrontResult {
  std::vector<ParetoPoint> front;
  std::size_t evaluations = 0;
};

/// Non-dominated points, sorted by n ascending; equal (n, quality) keeps the
/// lexicographically smallest params.
std::vector<ParetoPoint> pareto_filter(std::span<const ParetoPoint> points);

/// Achievable quality of a params vector over the corpus.
double front_quality(const ParetoCorpus& corpus, std::span<const std::size_t> params);

/// Quality of the top-N of list r alone at each N in `levels`.
std::vector<ParetoPoint> list_quality_curve(const ParetoCorpus& corpus, std::size_t r,
                                            std::span<const std::size_t> levels);

/// Pairwise fold of the lists in order, s_samples count levels per side.
/// Exactly (R-1)*s_samples^2 quality evaluations.
FrontResult greedy_front_combine(const ParetoCorpus& corpus, std::size_t s_samples);

struct WorkingTarget {
  enum class Kind { Count, Quality };
  Kind kind = Kind::Count;
  double value = 0.0;
};

struct Selection {
  ParetoPoint point;
  bool warning = false;  ///< quality floor was infeasible
};

Selection select_working_point(std::span<const ParetoPoint> front, WorkingTarget target);

struct ListCount {
  std::string id;
  std::size_t n = 0;
};

struct FrontParams {
  std::vector<ListCount> lists;
  std::string config_hash;
};

std::string front_params_to_json(const FrontParams& p);
FrontParams front_params_from_json(const std::string& text);

/// Proposal pool with the masks that justified its dedup.
struct Pool {
  std::vector<Proposal> proposals;
  std::vector<BinaryMask> masks;
};

using MaskFn = std::function<BinaryMask(const Proposal&)>;

/// Top-counts[i] of each list in list order (shorter lists give all they
/// have), then greedy dedup.
Pool combine_at(std::span<const std::size_t> counts, std::span<const RankedList> lists, const MaskFn& mask,
                double j_threshold = 0.95);

}  // namespace mcg
