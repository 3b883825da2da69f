#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flatpar/combinators.hpp"
#include "flatpar/par_array.hpp"

namespace flatpar::qh {

struct Point2 {
  double x = 0.0, y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Signed area: positive means r lies left of the directed line p -> q.
double cross(Point2 p, Point2 q, Point2 r);

// All same-depth recursive hull calls processed simultaneously. Undecided
// points live in a flat segmented vector; each segment belongs to one hull
// arc P -> Q (counter-clockwise) and holds the points strictly outside it.
// Confirmed hull points form a circular linked list spliced by the
// single-threaded driver.
struct HullState {
  SegmentedVector<Point2> points{ParArray<Point2>{}, ParArray<std::uint8_t>{}};
  ParArray<std::int64_t> orig_idx;      // original input index per point
  ParArray<Point2> seg_p, seg_q;        // per-segment arc endpoints
  ParArray<std::int64_t> seg_entry;     // hull-list entry of each arc's P

  std::vector<Point2> hull_pts;         // confirmed hull points
  std::vector<std::int64_t> hull_next;  // circular successor links
  std::int64_t hull_start = 0;          // entry of the lexicographic minimum

  std::size_t segment_count() const { return seg_p.size(); }
  std::size_t undecided() const { return points.data().size(); }
};

HullState init(const ParArray<Point2>& pts);
HullState step(const HullState& state);

// Counter-clockwise hull vertices starting at the lexicographic minimum;
// collinear boundary points are excluded.
ParArray<Point2> hull(const ParArray<Point2>& pts);

// Gift-wrapping oracle with the same output contract.
ParArray<Point2> brute_force_hull(const ParArray<Point2>& pts);

// Dataset generators.
ParArray<Point2> gen_rectangle(std::size_t n, std::uint64_t seed);
ParArray<Point2> gen_disk(std::size_t n, std::uint64_t seed);
ParArray<Point2> gen_quadratic(std::size_t n, std::uint64_t seed);

// Point file: one "x y" pair per line.
ParArray<Point2> read_points(const std::string& path);
void write_points(const ParArray<Point2>& pts, const std::string& path);

}  // namespace flatpar::qh
