#include "flatpar/quickhull.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace flatpar::qh {

namespace {

struct PackedPoint {
  Point2 p;
  std::int64_t orig = 0;
};

// Furthest-point candidate: larger outward distance wins, ties go to the
// lowest original index.
struct Cand {
  double d = -std::numeric_limits<double>::infinity();
  std::int64_t orig = std::numeric_limits<std::int64_t>::max();
  std::int64_t pos = -1;
};

bool lex_less(Point2 a, Point2 b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

}  // namespace

double cross(Point2 p, Point2 q, Point2 r) {
  return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

HullState init(const ParArray<Point2>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("hull: need at least 2 points");

  struct Ext {
    Point2 p;
    std::int64_t idx;
  };
  auto pick = [](auto cmp) {
    return [cmp](Ext a, Ext b) {
      if (b.idx < 0) return a;
      if (a.idx < 0) return b;
      if (cmp(a.p, b.p)) return a;
      if (cmp(b.p, a.p)) return b;
      return a.idx < b.idx ? a : b;
    };
  };
  const Ext none{{0, 0}, -1};
  auto exts = tabulate(n, [&](std::size_t i) {
    return Ext{pts[i], static_cast<std::int64_t>(i)};
  });
  const Ext lo = reduce(exts, make_monoid(pick(lex_less), none, true));
  const Ext hi = reduce(
      exts, make_monoid(pick([](Point2 a, Point2 b) { return lex_less(b, a); }),
                        none, true));
  const Point2 a = lo.p, b = hi.p;
  if (a == b) throw std::invalid_argument("hull: all points identical");

  auto packed = tabulate(n, [&](std::size_t i) {
    return PackedPoint{pts[i], static_cast<std::int64_t>(i)};
  });
  // Arc a->b (counter-clockwise lower chain) keeps points strictly right of
  // a->b; arc b->a keeps points strictly left. Collinear points drop out.
  auto [below, rest] = partition(
      packed, [&](const PackedPoint& e) { return cross(a, b, e.p) < 0.0; });
  auto above = partition(rest, [&](const PackedPoint& e) {
                 return cross(a, b, e.p) > 0.0;
               }).first;

  std::vector<Point2> data;
  std::vector<std::int64_t> orig;
  std::vector<std::uint8_t> flags;
  std::vector<Point2> seg_p, seg_q;
  std::vector<std::int64_t> seg_entry;
  auto add_segment = [&](const ParArray<PackedPoint>& seg, Point2 p, Point2 q,
                         std::int64_t entry) {
    if (seg.empty()) return;
    seg_p.push_back(p);
    seg_q.push_back(q);
    seg_entry.push_back(entry);
    for (std::size_t i = 0; i < seg.size(); ++i) {
      flags.push_back(i == 0 ? 1 : 0);
      data.push_back(seg[i].p);
      orig.push_back(seg[i].orig);
    }
  };
  add_segment(below, a, b, 0);
  add_segment(above, b, a, 1);

  HullState st;
  st.points = SegmentedVector<Point2>(ParArray<Point2>(std::move(data)),
                                      ParArray<std::uint8_t>(std::move(flags)));
  st.orig_idx = ParArray<std::int64_t>(std::move(orig));
  st.seg_p = ParArray<Point2>(std::move(seg_p));
  st.seg_q = ParArray<Point2>(std::move(seg_q));
  st.seg_entry = ParArray<std::int64_t>(std::move(seg_entry));
  st.hull_pts = {a, b};
  st.hull_next = {1, 0};
  st.hull_start = 0;
  return st;
}

HullState step(const HullState& state) {
  const std::size_t num_segs = state.segment_count();
  if (num_segs == 0) return state;

  const auto& pts = state.points.data();
  const auto& flags = state.points.flags();
  const std::size_t n = pts.size();
  const auto s64 = static_cast<std::int64_t>(num_segs);

  auto flag_vals = map(flags, [](std::uint8_t f) {
    return static_cast<std::int64_t>(f);
  });
  auto seg_of_incl = scan(flag_vals, sum_monoid<std::int64_t>(),
                          ScanMode::inclusive);
  auto seg_of = map(seg_of_incl, [](std::int64_t v) { return v - 1; });

  // Furthest point per segment.
  auto best = make_monoid(
      [](Cand a, Cand b) {
        if (a.d != b.d) return a.d > b.d ? a : b;
        return a.orig <= b.orig ? a : b;
      },
      Cand{}, true);
  auto cands = tabulate(n, [&](std::size_t i) {
    const auto s = static_cast<std::size_t>(seg_of[i]);
    return Cand{-cross(state.seg_p[s], state.seg_q[s], pts[i]),
                state.orig_idx[i], static_cast<std::int64_t>(i)};
  });
  auto winners = reduce_by_index(replicate(num_segs, Cand{}), best, seg_of,
                                 cands);
  auto furthest = map(winners, [&](const Cand& w) {
    return pts[static_cast<std::size_t>(w.pos)];
  });

  // Child assignment: 0 = arc (P,C), 1 = arc (C,Q), 2 = discarded (the
  // confirmed point itself, triangle interior, and on-line points).
  auto child = tabulate(n, [&](std::size_t i) -> std::int64_t {
    const auto s = static_cast<std::size_t>(seg_of[i]);
    if (static_cast<std::int64_t>(i) == winners[s].pos) return 2;
    const Point2 c = furthest[s];
    if (cross(state.seg_p[s], c, pts[i]) < 0.0) return 0;
    if (cross(c, state.seg_q[s], pts[i]) < 0.0) return 1;
    return 2;
  });
  auto bucket = tabulate(n, [&](std::size_t i) {
    return child[i] == 2 ? 2 * s64 : 2 * seg_of[i] + child[i];
  });

  auto counts = reduce_by_index(
      replicate(2 * num_segs + 1, std::int64_t{0}), sum_monoid<std::int64_t>(),
      bucket, replicate(n, std::int64_t{1}));
  auto real_counts = tabulate(2 * num_segs, [&](std::size_t b) {
    return counts[b];
  });
  auto offsets = scan(real_counts, sum_monoid<std::int64_t>(),
                      ScanMode::exclusive);
  const std::int64_t total_kept =
      reduce(real_counts, sum_monoid<std::int64_t>());

  // Rank of each kept point inside its destination bucket, via segmented
  // exclusive scans of the per-child indicators.
  auto rank_for = [&](std::int64_t which) {
    auto ind = tabulate(n, [&](std::size_t i) {
      return static_cast<std::int64_t>(child[i] == which ? 1 : 0);
    });
    return segmented_scan(SegmentedVector<std::int64_t>(ind, flags),
                          sum_monoid<std::int64_t>(), ScanMode::exclusive);
  };
  auto rank0 = rank_for(0);
  auto rank1 = rank_for(1);
  auto target = tabulate(n, [&](std::size_t i) -> std::int64_t {
    if (child[i] == 2) return -1;
    const std::int64_t rank = child[i] == 0 ? rank0[i] : rank1[i];
    return offsets[static_cast<std::size_t>(bucket[i])] + rank;
  });

  const auto kept = static_cast<std::size_t>(total_kept);
  auto new_pts = scatter(replicate(kept, Point2{}), target, pts);
  auto new_orig = scatter(replicate(kept, std::int64_t{0}), target,
                          state.orig_idx);
  auto flag_target = tabulate(2 * num_segs, [&](std::size_t b) {
    return real_counts[b] > 0 ? offsets[b] : -1;
  });
  auto new_flags = scatter(replicate(kept, std::uint8_t{0}), flag_target,
                           replicate(2 * num_segs, std::uint8_t{1}));

  // Surviving child segments, in (segment, child) order.
  auto keep01 = map(real_counts, [](std::int64_t c) {
    return static_cast<std::int64_t>(c > 0 ? 1 : 0);
  });
  auto new_ids = scan(keep01, sum_monoid<std::int64_t>(), ScanMode::exclusive);
  const auto new_seg_count = static_cast<std::size_t>(
      reduce(keep01, sum_monoid<std::int64_t>()));
  auto seg_target = tabulate(2 * num_segs, [&](std::size_t b) {
    return keep01[b] ? new_ids[b] : -1;
  });
  auto cand_p = tabulate(2 * num_segs, [&](std::size_t b) {
    return b % 2 == 0 ? state.seg_p[b / 2] : furthest[b / 2];
  });
  auto cand_q = tabulate(2 * num_segs, [&](std::size_t b) {
    return b % 2 == 0 ? furthest[b / 2] : state.seg_q[b / 2];
  });
  auto new_seg_p = scatter(replicate(new_seg_count, Point2{}), seg_target,
                           cand_p);
  auto new_seg_q = scatter(replicate(new_seg_count, Point2{}), seg_target,
                           cand_q);

  // Driver bookkeeping: splice each confirmed point into the hull list.
  HullState out;
  out.hull_pts = state.hull_pts;
  out.hull_next = state.hull_next;
  out.hull_start = state.hull_start;
  std::vector<std::int64_t> entry_of_c(num_segs);
  for (std::size_t s = 0; s < num_segs; ++s) {
    const auto id = static_cast<std::int64_t>(out.hull_pts.size());
    out.hull_pts.push_back(furthest[s]);
    const std::int64_t p_entry = state.seg_entry[s];
    out.hull_next.push_back(out.hull_next[static_cast<std::size_t>(p_entry)]);
    out.hull_next[static_cast<std::size_t>(p_entry)] = id;
    entry_of_c[s] = id;
  }
  std::vector<std::int64_t> new_entry(new_seg_count);
  for (std::size_t b = 0; b < 2 * num_segs; ++b)
    if (keep01[b])
      new_entry[static_cast<std::size_t>(new_ids[b])] =
          b % 2 == 0 ? state.seg_entry[b / 2] : entry_of_c[b / 2];

  out.points = SegmentedVector<Point2>(std::move(new_pts),
                                       std::move(new_flags));
  out.orig_idx = std::move(new_orig);
  out.seg_p = std::move(new_seg_p);
  out.seg_q = std::move(new_seg_q);
  out.seg_entry = ParArray<std::int64_t>(std::move(new_entry));
  return out;
}

ParArray<Point2> hull(const ParArray<Point2>& pts) {
  HullState st = init(pts);
  while (st.segment_count() > 0) st = step(st);
  std::vector<Point2> out;
  out.reserve(st.hull_pts.size());
  std::int64_t cur = st.hull_start;
  do {
    out.push_back(st.hull_pts[static_cast<std::size_t>(cur)]);
    cur = st.hull_next[static_cast<std::size_t>(cur)];
  } while (cur != st.hull_start);
  return ParArray<Point2>(std::move(out));
}

ParArray<Point2> brute_force_hull(const ParArray<Point2>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("hull: need at least 2 points");

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (lex_less(pts[i], pts[start])) start = i;

  auto dist2 = [&](Point2 a, Point2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    return dx * dx + dy * dy;
  };

  std::vector<Point2> out;
  std::size_t cur = start;
  for (std::size_t guard = 0; guard <= n; ++guard) {
    out.push_back(pts[cur]);
    std::size_t next = cur;
    for (std::size_t c = 0; c < n; ++c)
      if (!(pts[c] == pts[cur])) {
        next = c;
        break;
      }
    if (next == cur) throw std::invalid_argument("hull: all points identical");
    for (std::size_t c = 0; c < n; ++c) {
      const double d = cross(pts[cur], pts[next], pts[c]);
      if (d < 0.0)
        next = c;
      else if (d == 0.0 && dist2(pts[cur], pts[c]) > dist2(pts[cur], pts[next]))
        next = c;
    }
    cur = next;
    if (pts[cur] == pts[start]) break;
  }
  return ParArray<Point2>(std::move(out));
}

ParArray<Point2> gen_rectangle(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> out(n);
  for (auto& p : out) p = {unit(rng), unit(rng)};
  return ParArray<Point2>(std::move(out));
}

ParArray<Point2> gen_disk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Point2> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = coord(rng), y = coord(rng);
    if (x * x + y * y <= 1.0) out.push_back({x, y});
  }
  return ParArray<Point2>(std::move(out));
}

ParArray<Point2> gen_quadratic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Point2> out(n);
  for (auto& p : out) {
    const double x = coord(rng);
    p = {x, x * x};
  }
  return ParArray<Point2>(std::move(out));
}

ParArray<Point2> read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point file: " + path);
  std::vector<Point2> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Point2 p;
    if (!(ls >> p.x >> p.y))
      throw std::runtime_error("malformed point line: " + line);
    out.push_back(p);
  }
  return ParArray<Point2>(std::move(out));
}

void write_points(const ParArray<Point2>& pts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open point file: " + path);
  out.precision(17);
  for (const auto& p : pts) out << p.x << ' ' << p.y << '\n';
  if (!out) throw std::runtime_error("failed writing point file: " + path);
}

}  // namespace flatpar::qh
