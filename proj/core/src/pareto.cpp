#include "mcg/pareto.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mcg/error.hpp"
#include "mcg/eval.hpp"

namespace mcg {

std::size_t ParetoCorpus::list_length(std::size_t r) const {
  std::size_t len = 0;
  for (const auto& image : overlaps) len = std::max(len, image.at(r).size());
  return len;
}

std::size_t ParetoCorpus::total_instances() const {
  return std::accumulate(instance_counts.begin(), instance_counts.end(), std::size_t{0});
}

namespace {

void check_corpus(const ParetoCorpus& corpus) {
  if (corpus.overlaps.size() != corpus.instance_counts.size()) {
    throw ParameterError("pareto corpus: overlap tables and instance counts disagree");
  }
  for (const auto& image : corpus.overlaps) {
    if (image.size() != corpus.list_count) throw ParameterError("pareto corpus: every image needs every list");
  }
  if (corpus.total_instances() == 0) throw ParameterError("pareto corpus has no ground-truth instances");
}

/// Per-instance best overlap of list r's top-N, for every N in ascending `levels`.
std::vector<std::vector<double>> prefix_best(const ParetoCorpus& corpus, std::size_t r,
                                             std::span<const std::size_t> levels) {
  std::vector<std::vector<double>> out;
  std::vector<double> best(corpus.total_instances(), 0.0);
  std::size_t done = 0;
  for (std::size_t level : levels) {
    for (; done < level; ++done) {
      std::size_t offset = 0;
      for (std::size_t i = 0; i < corpus.overlaps.size(); ++i) {
        const auto& list = corpus.overlaps[i][r];
        if (done < list.size()) {
          const auto& row = list[done];
          for (std::size_t k = 0; k < corpus.instance_counts[i]; ++k) {
            best[offset + k] = std::max(best[offset + k], row[k]);
          }
        }
        offset += corpus.instance_counts[i];
      }
    }
    out.push_back(best);
  }
  return out;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::size_t> filter_indices(std::span<const ParetoPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = points[a];
    const auto& pb = points[b];
    if (pa.n_proposals != pb.n_proposals) return pa.n_proposals < pb.n_proposals;
    if (pa.quality != pb.quality) return pa.quality > pb.quality;
    if (pa.params != pb.params) return pa.params < pb.params;
    return a < b;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (kept.empty() || points[i].quality > points[kept.back()].quality) kept.push_back(i);
  }
  return kept;
}

}  // namespace

std::vector<ParetoPoint> pareto_filter(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> out;
  for (std::size_t i : filter_indices(points)) out.push_back(points[i]);
  return out;
}

double front_quality(const ParetoCorpus& corpus, std::span<const std::size_t> params) {
  check_corpus(corpus);
  if (params.size() != corpus.list_count) throw ParameterError("params must give one count per list");
  std::vector<double> best(corpus.total_instances(), 0.0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < corpus.overlaps.size(); ++i) {
    for (std::size_t r = 0; r < corpus.list_count; ++r) {
      const auto& list = corpus.overlaps[i][r];
      const std::size_t n = std::min(params[r], list.size());
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < corpus.instance_counts[i]; ++k) {
          best[offset + k] = std::max(best[offset + k], list[p][k]);
        }
      }
    }
    offset += corpus.instance_counts[i];
  }
  return mean(best);
}

std::vector<ParetoPoint> list_quality_curve(const ParetoCorpus& corpus, std::size_t r,
                                            std::span<const std::size_t> levels) {
  check_corpus(corpus);
  if (r >= corpus.list_count) throw ParameterError("list index out of range");
  std::vector<std::size_t> sorted(levels.begin(), levels.end());
  std::sort(sorted.begin(), sorted.end());
  const auto best = prefix_best(corpus, r, sorted);
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::vector<std::size_t> params(corpus.list_count, 0);
    params[r] = sorted[i];
    out.push_back({sorted[i], mean(best[i]), std::move(params)});
  }
  return out;
}

FrontResult greedy_front_combine(const ParetoCorpus& corpus, std::size_t s_samples) {
  check_corpus(corpus);
  if (corpus.list_count < 2) throw ParameterError("greedy_front_combine needs at least two lists");
  if (s_samples < 2) throw ParameterError("s_samples must be at least 2");

  struct Entry {
    ParetoPoint point;
    std::vector<double> best;
  };
  FrontResult result;
  std::vector<Entry> front;
  {
    const auto levels = geometric_levels(corpus.list_length(0), s_samples);
    const auto best = prefix_best(corpus, 0, levels);
    for (std::size_t i = 0; i < levels.size(); ++i) front.push_back({{levels[i], 0.0, {levels[i]}}, best[i]});
  }

  const std::size_t total = corpus.total_instances();
  for (std::size_t r = 1; r < corpus.list_count; ++r) {
    const auto levels = geometric_levels(corpus.list_length(r), s_samples);
    const auto best_b = prefix_best(corpus, r, levels);
    std::vector<Entry> candidates;
    candidates.reserve(front.size() * levels.size());
    for (const Entry& a : front) {
      for (std::size_t j = 0; j < levels.size(); ++j) {
        Entry e;
        e.best.resize(total);
        for (std::size_t k = 0; k < total; ++k) e.best[k] = std::max(a.best[k], best_b[j][k]);
        e.point.params = a.point.params;
        e.point.params.push_back(levels[j]);
        e.point.n_proposals = a.point.n_proposals + levels[j];
        e.point.quality = mean(e.best);
        ++result.evaluations;
        candidates.push_back(std::move(e));
      }
    }
    std::vector<ParetoPoint> points;
    points.reserve(candidates.size());
    for (const Entry& e : candidates) points.push_back(e.point);
    std::vector<Entry> filtered;
    for (std::size_t i : filter_indices(points)) filtered.push_back(std::move(candidates[i]));

    if (r + 1 == corpus.list_count) {
      for (Entry& e : filtered) result.front.push_back(std::move(e.point));
      break;
    }
    // Resample to s_samples points: for each target count, the largest n <= target.
    front.clear();
    for (std::size_t target : geometric_levels(filtered.back().point.n_proposals, s_samples)) {
      std::size_t pick = 0;
      for (std::size_t i = 0; i < filtered.size() && filtered[i].point.n_proposals <= target; ++i) pick = i;
      front.push_back(filtered[pick]);
    }
  }
  return result;
}

Selection select_working_point(std::span<const ParetoPoint> front, WorkingTarget target) {
  if (front.empty()) throw ParameterError("select_working_point: empty front");
  const auto sorted = pareto_filter(front);
  if (target.kind == WorkingTarget::Kind::Count) {
    const ParetoPoint* pick = nullptr;
    for (const auto& p : sorted) {
      if (static_cast<double>(p.n_proposals) <= target.value) pick = &p;
    }
    if (pick == nullptr) return {sorted.front(), true};
    return {*pick, false};
  }
  for (const auto& p : sorted) {
    if (p.quality >= target.value) return {p, false};
  }
  return {sorted.back(), true};
}

std::string front_params_to_json(const FrontParams& p) {
  nlohmann::json lists = nlohmann::json::array();
  for (const auto& l : p.lists) lists.push_back({{"id", l.id}, {"n", l.n}});
  nlohmann::json j;
  j["lists"] = std::move(lists);
  j["config_hash"] = p.config_hash;
  return j.dump();
}

FrontParams front_params_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FrontParams p;
    for (const auto& l : j.at("lists")) p.lists.push_back({l.at("id").get<std::string>(), l.at("n").get<std::size_t>()});
    p.config_hash = j.at("config_hash").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("front params: ") + e.what());
  }
}

Pool combine_at(std::span<const std::size_t> counts, std::span<const RankedList> lists, const MaskFn& mask,
                double j_threshold) {
  if (counts.size() != lists.size()) throw ParameterError("combine_at: one count per list required");
  Pool raw;
  for (std::size_t r = 0; r < lists.size(); ++r) {
    const std::size_t n = std::min(counts[r], lists[r].proposals.size());
    for (std::size_t i = 0; i < n; ++i) {
      raw.proposals.push_back(lists[r].proposals[i]);
      raw.masks.push_back(mask(lists[r].proposals[i]));
    }
  }
  Pool out;
  for (std::size_t i : dedup_indices(raw.masks, j_threshold)) {
    out.proposals.push_back(std::move(raw.proposals[i]));
    out.masks.push_back(std::move(raw.masks[i]));
  }
  return out;
}

}  // namespace mcg
