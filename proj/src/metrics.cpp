#include "recsteal/metrics.hpp"

namespace recsteal {

double agreement(const RecommendationList& a, const RecommendationList& b) {
  if (a.items.size() != b.items.size()) {
    throw std::invalid_argument("agreement: list lengths differ");
  }
  if (a.items.empty()) throw std::invalid_argument("agreement: empty lists");
  std::vector<int> sa = a.items;
  std::vector<int> sb = b.items;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<int> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(a.items.size());
}

}  // namespace recsteal
