#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "avcons/core/agent.hpp"
#include "avcons/core/errors.hpp"
#include "avcons/core/parallel.hpp"
#include "avcons/interaction/zones.hpp"

namespace avcons {

struct InteractionFrame {
  double time = 0.0;
  double distance = 0.0;
  double bearing = 0.0;  // degrees clockwise from subject heading
  int zone = -1;         // index into the layout, -1 when beyond every sector range
};

/// One contiguous episode in which `other` stays within the detection radius
/// of `subject`. A->B and B->A are separate records with identical support.
struct InteractionRecord {
  std::string subject_id;
  std::string other_id;
  AgentClass subject_class;
  AgentClass other_class;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<InteractionFrame> frames;

  double duration() const { return end_time - start_time; }
};

struct InteractionSet {
  ZoneLayout layout = ZoneLayout::default_layout();
  double dt = 0.1;
  double radius = 30.0;
  std::vector<InteractionRecord> records;

  std::string zone_name(const InteractionFrame& f) const {
    return f.zone < 0 ? std::string() : layout.sector(static_cast<std::size_t>(f.zone)).name;
  }
};

struct DetectionOptions {
  double radius = 30.0;
  double min_duration = 0.5;
  double dt = 0.1;
  ZoneLayout layout = ZoneLayout::default_layout();
  unsigned threads = 1;
  /// Frames handled per work item. Fixed so results never depend on thread count.
  std::size_t frames_per_chunk = 512;
};

namespace detail {

struct PairHit {
  std::uint32_t a;  // lower track index
  std::uint32_t b;
  std::int64_t frame;

  friend bool operator<(const PairHit& l, const PairHit& r) {
    return std::tie(l.a, l.b, l.frame) < std::tie(r.a, r.b, r.frame);
  }
};

inline std::uint64_t cell_key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
}

/// First frame index of a track on the dt grid; throws if the track is not on it.
inline std::int64_t grid_origin(const AgentTrack& track, double dt) {
  const auto f0 = static_cast<std::int64_t>(std::llround(track.start_time() / dt));
  const double tol = 1e-3 * dt;
  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    const double expect = static_cast<double>(f0 + static_cast<std::int64_t>(i)) * dt;
    if (std::abs(track.samples[i].time - expect) > tol) {
      throw ArgumentError("track '" + track.agent_id +
                          "' is not on the common frame grid; resample first");
    }
  }
  return f0;
}

}  // namespace detail

/// Finds every pairwise encounter within `radius` lasting at least
/// `min_duration`. Candidate pairs come from a per-frame uniform grid with
/// cell size equal to the radius, so only agents in adjacent cells are compared.
inline InteractionSet detect_interactions(const std::vector<AgentTrack>& tracks,
                                          const DetectionOptions& opt) {
  if (!(opt.radius > 0.0)) throw ArgumentError("detection radius must be positive");
  if (!(opt.dt > 0.0)) throw ArgumentError("frame dt must be positive");

  InteractionSet result;
  result.layout = opt.layout;
  result.dt = opt.dt;
  result.radius = opt.radius;
  if (tracks.size() < 2) return result;

  const std::size_t n = tracks.size();
  std::vector<std::int64_t> first(n), last(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (tracks[i].samples.empty()) throw ArgumentError("empty track '" + tracks[i].agent_id + "'");
    first[i] = detail::grid_origin(tracks[i], opt.dt);
    last[i] = first[i] + static_cast<std::int64_t>(tracks[i].samples.size()) - 1;
  }
  const std::int64_t f_min = *std::min_element(first.begin(), first.end());
  const std::int64_t f_max = *std::max_element(last.begin(), last.end());
  const std::size_t chunk = std::max<std::size_t>(1, opt.frames_per_chunk);
  const std::size_t n_chunks = static_cast<std::size_t>(f_max - f_min) / chunk + 1;

  std::vector<std::vector<detail::PairHit>> chunk_hits(n_chunks);
  const double cell = opt.radius;
  parallel_for(n_chunks, opt.threads, [&](std::size_t c) {
    const std::int64_t c_begin = f_min + static_cast<std::int64_t>(c * chunk);
    const std::int64_t c_end = std::min<std::int64_t>(c_begin + static_cast<std::int64_t>(chunk) - 1, f_max);
    std::vector<std::uint32_t> live;
    for (std::size_t i = 0; i < n; ++i) {
      if (first[i] <= c_end && last[i] >= c_begin) live.push_back(static_cast<std::uint32_t>(i));
    }
    struct Entry {
      std::uint64_t key;
      std::uint32_t idx;
      double x, y;
    };
    std::vector<Entry> entries;
    entries.reserve(live.size());
    auto& out = chunk_hits[c];
    constexpr std::int64_t kOffsets[4][2] = {{1, -1}, {1, 0}, {1, 1}, {0, 1}};
    for (std::int64_t f = c_begin; f <= c_end; ++f) {
      entries.clear();
      for (auto i : live) {
        if (f < first[i] || f > last[i]) continue;
        const auto& s = tracks[i].samples[static_cast<std::size_t>(f - first[i])];
        const auto cx = static_cast<std::int64_t>(std::floor(s.x / cell));
        const auto cy = static_cast<std::int64_t>(std::floor(s.y / cell));
        entries.push_back({detail::cell_key(cx, cy), i, s.x, s.y});
      }
      if (entries.size() < 2) continue;
      std::sort(entries.begin(), entries.end(), [](const Entry& l, const Entry& r) {
        return l.key != r.key ? l.key < r.key : l.idx < r.idx;
      });
      auto test = [&](const Entry& p, const Entry& q) {
        const double dx = q.x - p.x;
        const double dy = q.y - p.y;
        if (dx * dx + dy * dy > opt.radius * opt.radius * (1.0 + 1e-12)) return;
        if (std::hypot(dx, dy) > opt.radius) return;
        out.push_back({std::min(p.idx, q.idx), std::max(p.idx, q.idx), f});
      };
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const Entry& p = entries[e];
        for (std::size_t k = e + 1; k < entries.size() && entries[k].key == p.key; ++k) {
          test(p, entries[k]);
        }
        const auto cx = static_cast<std::int64_t>(std::floor(p.x / cell));
        const auto cy = static_cast<std::int64_t>(std::floor(p.y / cell));
        for (const auto& off : kOffsets) {
          const std::uint64_t nk = detail::cell_key(cx + off[0], cy + off[1]);
          auto lo = std::lower_bound(entries.begin(), entries.end(), nk,
                                     [](const Entry& en, std::uint64_t k) { return en.key < k; });
          for (; lo != entries.end() && lo->key == nk; ++lo) test(p, *lo);
        }
      }
    }
  });

  std::size_t total = 0;
  for (const auto& h : chunk_hits) total += h.size();
  std::vector<detail::PairHit> hits;
  hits.reserve(total);
  for (auto& h : chunk_hits) {
    hits.insert(hits.end(), h.begin(), h.end());
    std::vector<detail::PairHit>().swap(h);
  }
  std::sort(hits.begin(), hits.end());

  struct Episode {
    std::uint32_t a, b;
    std::int64_t f0, f1;
  };
  std::vector<Episode> episodes;
  const double tol = 1e-9;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j + 1 < hits.size() && hits[j + 1].a == hits[i].a && hits[j + 1].b == hits[i].b &&
           hits[j + 1].frame == hits[j].frame + 1) {
      ++j;
    }
    const double span = static_cast<double>(hits[j].frame - hits[i].frame) * opt.dt;
    if (span >= opt.min_duration - tol) {
      episodes.push_back({hits[i].a, hits[i].b, hits[i].frame, hits[j].frame});
    }
    i = j + 1;
  }
  std::vector<detail::PairHit>().swap(hits);

  std::vector<std::vector<double>> headings(n);
  {
    std::vector<char> needed(n, 0);
    for (const auto& e : episodes) needed[e.a] = needed[e.b] = 1;
    parallel_for(n, opt.threads, [&](std::size_t i) {
      if (needed[i]) headings[i] = compute_headings(tracks[i]);
    });
  }

  std::vector<InteractionRecord> records(episodes.size() * 2);
  parallel_for(episodes.size(), opt.threads, [&](std::size_t e) {
    const Episode& ep = episodes[e];
    for (int dir = 0; dir < 2; ++dir) {
      const std::uint32_t si = dir == 0 ? ep.a : ep.b;
      const std::uint32_t oi = dir == 0 ? ep.b : ep.a;
      const AgentTrack& subj = tracks[si];
      const AgentTrack& oth = tracks[oi];
      InteractionRecord rec;
      rec.subject_id = subj.agent_id;
      rec.other_id = oth.agent_id;
      rec.subject_class = subj.agent_class;
      rec.other_class = oth.agent_class;
      rec.frames.reserve(static_cast<std::size_t>(ep.f1 - ep.f0 + 1));
      for (std::int64_t f = ep.f0; f <= ep.f1; ++f) {
        const auto ks = static_cast<std::size_t>(f - first[si]);
        const auto ko = static_cast<std::size_t>(f - first[oi]);
        const TrackSample& s = subj.samples[ks];
        const TrackSample& o = oth.samples[ko];
        // Distance is computed from the lower index so both directions agree bit-for-bit.
        const TrackSample& lo = dir == 0 ? s : o;
        const TrackSample& hi = dir == 0 ? o : s;
        InteractionFrame fr;
        fr.time = s.time;
        fr.distance = std::hypot(hi.x - lo.x, hi.y - lo.y);
        fr.bearing = bearing_deg(headings[si][ks], {s.x, s.y}, {o.x, o.y});
        auto z = opt.layout.locate(fr.bearing, fr.distance);
        fr.zone = z ? static_cast<int>(*z) : -1;
        rec.frames.push_back(fr);
      }
      rec.start_time = rec.frames.front().time;
      rec.end_time = rec.frames.back().time;
      records[2 * e + static_cast<std::size_t>(dir)] = std::move(rec);
    }
  });

  std::sort(records.begin(), records.end(), [](const InteractionRecord& l, const InteractionRecord& r) {
    return std::tie(l.subject_id, l.other_id, l.start_time) <
           std::tie(r.subject_id, r.other_id, r.start_time);
  });
  result.records = std::move(records);
  return result;
}

inline InteractionSet detect_interactions(const std::vector<AgentTrack>& tracks, double radius,
                                          double min_duration, double dt = 0.1) {
  DetectionOptions opt;
  opt.radius = radius;
  opt.min_duration = min_duration;
  opt.dt = dt;
  return detect_interactions(tracks, opt);
}

}  // namespace avcons
