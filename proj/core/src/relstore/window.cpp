#include "actordb/relstore/window.hpp"

#include <algorithm>
#include <cmath>

namespace actordb::rel {

std::pair<double, double> mean_and_sample_stddev(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

WindowStats window_of(Value key, std::vector<WindowSample> samples, std::int64_t k) {
  auto newer = [](const WindowSample& a, const WindowSample& b) {
    return a.order != b.order ? a.order > b.order : a.record_id > b.record_id;
  };
  const auto take = static_cast<std::size_t>(std::max<std::int64_t>(0, std::min<std::int64_t>(k, samples.size())));
  std::partial_sort(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take), samples.end(), newer);

  std::vector<double> window;
  window.reserve(take);
  for (std::size_t i = 0; i < take; ++i) window.push_back(samples[i].value);
  auto [mean, sd] = mean_and_sample_stddev(window);
  return WindowStats{std::move(key), mean, sd, static_cast<std::int64_t>(take)};
}

}  // namespace actordb::rel
