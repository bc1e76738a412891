#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "avcons/core/agent.hpp"

namespace avcons {

inline constexpr double kDefaultPetProximity = 5.0;

/// Closest approach between two tracks over all pairs of sample times, each
/// agent evaluated at its own time.
struct Encroachment {
  double min_separation = std::numeric_limits<double>::infinity();
  double time_a = 0.0;
  double time_b = 0.0;

  double time_gap() const { return std::abs(time_a - time_b); }
};

/// Global minimiser of ||pos_a(t_a) - pos_b(t_b)||; ties on distance go to the
/// smallest |t_a - t_b|. Uses a sweep over b sorted by x: for each a-sample
/// only b-samples whose x lies within the current best distance are examined.
inline Encroachment closest_encroachment(const AgentTrack& a, const AgentTrack& b) {
  Encroachment best;
  if (a.samples.empty() || b.samples.empty()) return best;
  double best_gap = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(b.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return b.samples[l].x < b.samples[r].x;
  });
  std::vector<double> xs(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) xs[k] = b.samples[order[k]].x;

  auto consider = [&](const TrackSample& sa, const TrackSample& sb) {
    const double d = std::hypot(sa.x - sb.x, sa.y - sb.y);
    if (d > best.min_separation) return;
    const double gap = std::abs(sa.time - sb.time);
    if (d < best.min_separation || gap < best_gap) {
      best.min_separation = d;
      best.time_a = sa.time;
      best.time_b = sb.time;
      best_gap = gap;
    }
  };

  // Seed with same-index pairs so the sweep window starts narrow.
  const std::size_t common = std::min(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < common; ++i) consider(a.samples[i], b.samples[i]);

  for (const auto& sa : a.samples) {
    const auto mid = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), sa.x) - xs.begin());
    for (std::size_t k = mid; k < xs.size() && xs[k] - sa.x <= best.min_separation; ++k) {
      consider(sa, b.samples[order[k]]);
    }
    for (std::size_t k = mid; k-- > 0 && sa.x - xs[k] <= best.min_separation;) {
      consider(sa, b.samples[order[k]]);
    }
  }
  return best;
}

/// Post-encroachment time: |t_a - t_b| at the point of closest proximity,
/// present only when that separation is below the proximity threshold.
inline std::optional<double> compute_pet(const AgentTrack& a, const AgentTrack& b,
                                         double proximity_threshold = kDefaultPetProximity) {
  const Encroachment e = closest_encroachment(a, b);
  if (e.min_separation < proximity_threshold) return e.time_gap();
  return std::nullopt;
}

}  // namespace avcons
