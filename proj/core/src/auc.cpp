#include "linkpmf/auc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace linkpmf {

std::string to_string(PairCategory category) {
  switch (category) {
    case PairCategory::kAll: return "all";
    case PairCategory::kNew: return "new";
    case PairCategory::kColdStartUser: return "cold_start_user";
    case PairCategory::kColdStartHost: return "cold_start_host";
  }
  return "unknown";
}

PairCategory parse_category(const std::string& name) {
  for (const auto c : {PairCategory::kAll, PairCategory::kNew, PairCategory::kColdStartUser,
                       PairCategory::kColdStartHost}) {
    if (to_string(c) == name) return c;
  }
  throw Error("unknown pair category '" + name + "'");
}

AucResult compute_auc(std::span<const ScoredPair> scored) {
  AucResult out;
  for (const auto& p : scored) {
    if (!std::isfinite(p.score)) throw Error("AUC input contains a non-finite score");
    (p.label ? out.n_pos : out.n_neg) += 1;
  }
  if (out.n_pos == 0 || out.n_neg == 0) {
    throw Error("AUC needs both classes (" + std::to_string(out.n_pos) + " positives, " +
                std::to_string(out.n_neg) + " negatives)");
  }

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

  // Twice the positive rank sum, with mid-ranks for ties, in exact integers.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::uint64_t pos = 0;
    while (end < order.size() && scored[order[end]].score == scored[order[start]].score) {
      pos += scored[order[end]].label;
      ++end;
    }
    twice_rank_sum += pos * (start + end + 1);
    start = end;
  }
  const std::uint64_t n_pos = out.n_pos;
  const std::uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  out.auc = static_cast<double>(twice_u) / (2.0 * static_cast<double>(out.n_pos) * static_cast<double>(out.n_neg));

  // ROC from the highest threshold down, one vertex per distinct score.
  out.roc.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t end = order.size(); end > 0;) {
    std::size_t start = end;
    while (start > 0 && scored[order[start - 1]].score == scored[order[end - 1]].score) {
      --start;
      (scored[order[start]].label ? tp : fp) += 1;
    }
    out.roc.push_back({static_cast<double>(fp) / static_cast<double>(out.n_neg),
                       static_cast<double>(tp) / static_cast<double>(out.n_pos)});
    end = start;
  }
  return out;
}

double trapezoid_area(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k) {
    area += (roc[k].fpr - roc[k - 1].fpr) * (roc[k].tpr + roc[k - 1].tpr) * 0.5;
  }
  return area;
}

}  // namespace linkpmf
