#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/interaction/detect.hpp"

namespace avcons {

struct Region {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  bool empty() const { return !(xmax > xmin) || !(ymax > ymin); }
  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
};

enum class CellAggregate { Mean, Max };

inline constexpr double kDecelClipMax = 3.0;

/// Longitudinal deceleration, clipped to [0, 3] m/s^2, accumulated on a
/// regular grid anchored at the region's lower-left corner.
struct DecelGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  CellAggregate aggregate = CellAggregate::Mean;
  std::vector<double> sum;
  std::vector<double> peak;
  std::vector<std::size_t> count;

  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }

  std::optional<double> value(std::size_t ix, std::size_t iy) const {
    const std::size_t i = index(ix, iy);
    if (count[i] == 0) return std::nullopt;
    return aggregate == CellAggregate::Mean ? sum[i] / static_cast<double>(count[i]) : peak[i];
  }

  std::size_t total_count() const {
    std::size_t n = 0;
    for (auto c : count) n += c;
    return n;
  }
};

/// Positive part of -(a . v_hat); zero at standstill.
inline double longitudinal_deceleration(const TrackSample& s) {
  return std::max(0.0, -longitudinal_accel(s));
}

/// Builds the grid from every frame of the tracks of `kind` (all kinds when
/// nullopt) that lies in the region and decelerates. Tracks are visited in
/// agent-id order, so the result does not depend on input order.
inline DecelGrid build_decel_grid(const std::vector<AgentTrack>& tracks, const Region& region,
                                  double cell_size, std::optional<AgentKind> kind = std::nullopt,
                                  CellAggregate aggregate = CellAggregate::Mean) {
  if (!(cell_size > 0.0)) throw ArgumentError("grid cell size must be positive");
  if (region.empty()) throw ArgumentError("grid region is empty");
  DecelGrid g;
  g.origin_x = region.xmin;
  g.origin_y = region.ymin;
  g.cell_size = cell_size;
  g.aggregate = aggregate;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((region.xmax - region.xmin) / cell_size)));
  g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((region.ymax - region.ymin) / cell_size)));
  g.sum.assign(g.nx * g.ny, 0.0);
  g.peak.assign(g.nx * g.ny, 0.0);
  g.count.assign(g.nx * g.ny, 0);

  std::vector<const AgentTrack*> order;
  for (const auto& t : tracks) {
    if (!kind || t.agent_class.kind == *kind) order.push_back(&t);
  }
  std::sort(order.begin(), order.end(),
            [](const AgentTrack* l, const AgentTrack* r) { return l->agent_id < r->agent_id; });
  for (const AgentTrack* t : order) {
    for (const auto& s : t->samples) {
      if (!region.contains(s.x, s.y)) continue;
      const double decel = longitudinal_deceleration(s);
      if (!(decel > 0.0)) continue;
      const double v = std::min(decel, kDecelClipMax);
      const auto ix = std::min(g.nx - 1, static_cast<std::size_t>((s.x - region.xmin) / cell_size));
      const auto iy = std::min(g.ny - 1, static_cast<std::size_t>((s.y - region.ymin) / cell_size));
      const std::size_t i = g.index(ix, iy);
      g.sum[i] += v;
      g.peak[i] = std::max(g.peak[i], v);
      ++g.count[i];
    }
  }
  return g;
}

/// Bounding box of every sample, padded to whole cells.
inline Region bounding_region(const std::vector<AgentTrack>& tracks, double cell_size) {
  Region r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& t : tracks) {
    for (const auto& s : t.samples) {
      r.xmin = std::min(r.xmin, s.x);
      r.ymin = std::min(r.ymin, s.y);
      r.xmax = std::max(r.xmax, s.x);
      r.ymax = std::max(r.ymax, s.y);
    }
  }
  r.xmin = std::floor(r.xmin / cell_size) * cell_size;
  r.ymin = std::floor(r.ymin / cell_size) * cell_size;
  r.xmax = std::max(r.xmin + cell_size, std::ceil(r.xmax / cell_size) * cell_size);
  r.ymax = std::max(r.ymin + cell_size, std::ceil(r.ymax / cell_size) * cell_size);
  return r;
}

struct AccelDistancePoint {
  std::string subject_id;
  std::string other_id;
  double time = 0.0;
  double distance = 0.0;
  double accel = 0.0;  // signed longitudinal acceleration of the subject
  AgentKind subject_kind = AgentKind::HDV;
};

/// One point per frame of every vehicle->VRU interaction record.
inline std::vector<AccelDistancePoint> accel_vs_distance(const InteractionSet& interactions,
                                                         const std::vector<AgentTrack>& tracks) {
  std::map<std::string, const AgentTrack*> by_id;
  for (const auto& t : tracks) by_id[t.agent_id] = &t;
  std::vector<AccelDistancePoint> out;
  for (const auto& rec : interactions.records) {
    if (rec.subject_class.vru_flag() || !rec.other_class.vru_flag()) continue;
    auto it = by_id.find(rec.subject_id);
    if (it == by_id.end()) continue;
    for (const auto& f : rec.frames) {
      const TrackSample* s = it->second->sample_at(f.time);
      if (!s) continue;
      out.push_back({rec.subject_id, rec.other_id, f.time, f.distance, longitudinal_accel(*s),
                     rec.subject_class.kind});
    }
  }
  return out;
}

}  // namespace avcons
