#include "track/trackmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "common/config.hpp"
#include "common/errors.hpp"
#include "track/image_io.hpp"

namespace racelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
const int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

// 1-D squared distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  std::vector<int> v(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n) + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      int p = v[static_cast<size_t>(k)];
      s = ((f[static_cast<size_t>(q)] + q * q) - (f[static_cast<size_t>(p)] + p * p)) /
          (2.0 * q - 2.0 * p);
      if (s > z[static_cast<size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<size_t>(k)] = q;
    z[static_cast<size_t>(k)] = s;
    z[static_cast<size_t>(k) + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<size_t>(k) + 1] < q) ++k;
    int p = v[static_cast<size_t>(k)];
    d[static_cast<size_t>(q)] = (q - p) * (q - p) + f[static_cast<size_t>(p)];
  }
}

std::vector<double> squared_edt(const std::vector<uint8_t>& occupied, int width,
                                int height) {
  std::vector<double> g(static_cast<size_t>(width) * height);
  std::vector<double> col_f(static_cast<size_t>(height));
  std::vector<double> col_d(static_cast<size_t>(height));
  // Large finite sentinel: infinities break the parabola intersections on
  // rows or columns with no occupied pixel at all.
  const double far = 4.0 * (static_cast<double>(width) * width +
                            static_cast<double>(height) * height);
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r)
      col_f[static_cast<size_t>(r)] =
          occupied[static_cast<size_t>(r) * width + c] ? 0.0 : far;
    edt_1d(col_f, col_d, height);
    for (int r = 0; r < height; ++r)
      g[static_cast<size_t>(r) * width + c] = col_d[static_cast<size_t>(r)];
  }
  std::vector<double> out(static_cast<size_t>(width) * height);
  std::vector<double> row_f(static_cast<size_t>(width));
  std::vector<double> row_d(static_cast<size_t>(width));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c)
      row_f[static_cast<size_t>(c)] = g[static_cast<size_t>(r) * width + c];
    edt_1d(row_f, row_d, width);
    for (int c = 0; c < width; ++c)
      out[static_cast<size_t>(r) * width + c] = row_d[static_cast<size_t>(c)];
  }
  return out;
}

struct Grid {
  const std::vector<uint8_t>& occupied;
  int width, height;
  double res;

  size_t idx(int r, int c) const { return static_cast<size_t>(r) * width + c; }
  bool in(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
  bool wall(int r, int c) const { return !in(r, c) || occupied[idx(r, c)] != 0; }
  Vec2 center(int r, int c) const { return {(c + 0.5) * res, (r + 0.5) * res}; }
  std::pair<int, int> pixel(Vec2 p) const {
    return {static_cast<int>(std::floor(p.y / res)),
            static_cast<int>(std::floor(p.x / res))};
  }
};

struct GeoField {
  std::vector<double> dist;  // geodesic meters from the start line, +inf unreachable
  std::vector<uint8_t> cut;  // start-line pixels
  double max_dist = 0.0;
};

// Ordering field: wall-respecting travel distance from the start line, going
// with the driving direction. Also validates that the free space closes into
// a loop around the line.
GeoField geodesic_order(const Grid& g, Vec2 start_pos, double start_yaw) {
  auto [sr, sc] = g.pixel(start_pos);
  if (g.wall(sr, sc)) throw PlacementError("start pose lies on an occupied pixel");

  Vec2 fwd = heading(start_yaw);
  Vec2 line{-fwd.y, fwd.x};
  double max_march = (g.width + g.height) * g.res;

  GeoField out;
  out.cut.assign(static_cast<size_t>(g.width) * g.height, 0);
  // March wall-to-wall through the start pose; a second layer one pixel
  // behind the line keeps 8-connected searches from leaking diagonally.
  auto mark = [&](Vec2 p) {
    auto [r, c] = g.pixel(p);
    if (!g.wall(r, c)) out.cut[g.idx(r, c)] = 1;
    auto [rb, cb] = g.pixel({p.x - fwd.x * g.res, p.y - fwd.y * g.res});
    if (!g.wall(rb, cb)) out.cut[g.idx(rb, cb)] = 1;
  };
  for (double sgn : {1.0, -1.0}) {
    double t = 0.0;
    while (true) {
      Vec2 p{start_pos.x + sgn * line.x * t, start_pos.y + sgn * line.y * t};
      auto [r, c] = g.pixel(p);
      if (g.wall(r, c)) break;
      mark(p);
      t += g.res * 0.25;
      if (t > max_march)
        throw TopologyError("start line never reaches a wall: map has no loop");
    }
  }

  out.dist.assign(static_cast<size_t>(g.width) * g.height, kInf);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> queue;
  bool any_backward = false;
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      if (!out.cut[g.idx(r, c)]) continue;
      for (int k = 0; k < 8; ++k) {
        int rr = r + kDr[k], cc = c + kDc[k];
        if (g.wall(rr, cc) || out.cut[g.idx(rr, cc)]) continue;
        if ((g.center(rr, cc) - start_pos).dot(fwd) > 0.0) {
          if (out.dist[g.idx(rr, cc)] > 0.0) {
            out.dist[g.idx(rr, cc)] = 0.0;
            queue.emplace(0.0, static_cast<int>(g.idx(rr, cc)));
          }
        } else {
          any_backward = true;
        }
      }
    }
  if (queue.empty() || !any_backward)
    throw TopologyError("start line does not separate two sides of a loop");

  const double diag = g.res * std::sqrt(2.0);
  while (!queue.empty()) {
    auto [d, flat] = queue.top();
    queue.pop();
    if (d > out.dist[static_cast<size_t>(flat)]) continue;
    int r = flat / g.width, c = flat % g.width;
    for (int k = 0; k < 8; ++k) {
      int rr = r + kDr[k], cc = c + kDc[k];
      if (g.wall(rr, cc) || out.cut[g.idx(rr, cc)]) continue;
      double nd = d + ((kDr[k] != 0 && kDc[k] != 0) ? diag : g.res);
      if (nd < out.dist[g.idx(rr, cc)]) {
        out.dist[g.idx(rr, cc)] = nd;
        queue.emplace(nd, static_cast<int>(g.idx(rr, cc)));
      }
    }
  }

  bool closed = false;
  for (int r = 0; r < g.height && !closed; ++r)
    for (int c = 0; c < g.width && !closed; ++c) {
      if (!out.cut[g.idx(r, c)]) continue;
      for (int k = 0; k < 8; ++k) {
        int rr = r + kDr[k], cc = c + kDc[k];
        if (g.wall(rr, cc) || out.cut[g.idx(rr, cc)]) continue;
        if ((g.center(rr, cc) - start_pos).dot(fwd) <= 0.0 &&
            std::isfinite(out.dist[g.idx(rr, cc)]))
          closed = true;
      }
    }
  if (!closed)
    throw TopologyError("free space does not close into a loop around the start line");

  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      size_t i = g.idx(r, c);
      if (g.occupied[i] || out.cut[i]) continue;
      if (!std::isfinite(out.dist[i]))
        throw TopologyError("free space is split by the start line: not a loop");
      out.max_dist = std::max(out.max_dist, out.dist[i]);
    }
  return out;
}

// Closed polyline through the free pixel of maximum wall clearance per bin of
// the ordering field, lightly smoothed and resampled at uniform arc length.
// order values live in [0, order_max); cut pixels anchor the first point.
std::vector<Vec2> centerline_from_order(const Grid& g, const std::vector<double>& order,
                                        double order_max, const std::vector<uint8_t>& cut,
                                        const std::vector<double>& clearance,
                                        double spacing, double approx_loop) {
  int bins = std::max(64, static_cast<int>(std::lround(approx_loop / (2.0 * g.res))));
  // Pixels right at the seam can carry a wrap-ambiguous order value; the
  // anchor waypoint covers that stretch, so keep them out of the bins.
  double band = 0.3 / approx_loop * order_max;
  std::vector<int> best(static_cast<size_t>(bins), -1);
  std::vector<double> best_clear(static_cast<size_t>(bins), -1.0);
  int anchor = -1;
  double anchor_clear = -1.0;
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      size_t i = g.idx(r, c);
      if (g.occupied[i]) continue;
      if (cut[i]) {
        if (clearance[i] > anchor_clear) {
          anchor_clear = clearance[i];
          anchor = static_cast<int>(i);
        }
        continue;
      }
      double v = order[i];
      if (!(v >= 0.0) || !std::isfinite(v)) continue;
      if (v < band || v > order_max - band) continue;
      int b = std::min(bins - 1, static_cast<int>(v / order_max * bins));
      if (clearance[i] > best_clear[static_cast<size_t>(b)]) {
        best_clear[static_cast<size_t>(b)] = clearance[i];
        best[static_cast<size_t>(b)] = static_cast<int>(i);
      }
    }

  std::vector<Vec2> raw;
  if (anchor >= 0) raw.push_back(g.center(anchor / g.width, anchor % g.width));
  for (int b = 0; b < bins; ++b)
    if (best[static_cast<size_t>(b)] >= 0) {
      int i = best[static_cast<size_t>(b)];
      raw.push_back(g.center(i / g.width, i % g.width));
    }
  if (raw.size() < 8) throw TopologyError("too few centerline samples");

  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Vec2> sm(raw.size());
    int n = static_cast<int>(raw.size());
    for (int i = 0; i < n; ++i) {
      Vec2 acc{0, 0};
      for (int k = -2; k <= 2; ++k)
        acc = acc + raw[static_cast<size_t>((i + k + n) % n)];
      sm[static_cast<size_t>(i)] = acc * (1.0 / 5.0);
    }
    sm[0] = raw[0];  // keep the anchor on the start line
    raw = std::move(sm);
  }

  double total = 0.0;
  int n = static_cast<int>(raw.size());
  std::vector<double> seg(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    seg[static_cast<size_t>(i)] =
        (raw[static_cast<size_t>((i + 1) % n)] - raw[static_cast<size_t>(i)]).norm();
    total += seg[static_cast<size_t>(i)];
  }
  if (spacing > total)
    throw ParameterError("waypoint spacing " + std::to_string(spacing) +
                         " m exceeds the loop length " + std::to_string(total) + " m");
  int count = std::max(8, static_cast<int>(std::lround(total / spacing)));
  double step = total / count;
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(count));
  double walked = 0.0;
  int i = 0;
  for (int k = 0; k < count; ++k) {
    double target = k * step;
    while (walked + seg[static_cast<size_t>(i)] < target) {
      walked += seg[static_cast<size_t>(i)];
      i = (i + 1) % n;
    }
    double t = seg[static_cast<size_t>(i)] > 0
                   ? (target - walked) / seg[static_cast<size_t>(i)]
                   : 0.0;
    Vec2 a = raw[static_cast<size_t>(i)];
    Vec2 b = raw[static_cast<size_t>((i + 1) % n)];
    out.push_back(a + (b - a) * t);
  }
  return out;
}

// Per-pixel progress: every free pixel is assigned to its geodesically
// nearest point of the (densely resampled) centerline, then refined by exact
// projection onto the neighboring polyline segments. Wall-respecting by
// construction, and arc-uniform: one pixel along a straight advances progress
// by resolution / loop-length.
ProgressField project_progress(const Grid& g, const std::vector<Vec2>& centerline,
                               const std::vector<uint8_t>& cut) {
  // Dense samples at ~res/2 arc spacing.
  int n = static_cast<int>(centerline.size());
  double total = 0.0;
  std::vector<double> seg(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    seg[static_cast<size_t>(i)] = (centerline[static_cast<size_t>((i + 1) % n)] -
                                   centerline[static_cast<size_t>(i)]).norm();
    total += seg[static_cast<size_t>(i)];
  }
  int dense_n = std::max(16, static_cast<int>(std::lround(total / (0.5 * g.res))));
  double step = total / dense_n;
  std::vector<Vec2> dense(static_cast<size_t>(dense_n));
  {
    double walked = 0.0;
    int i = 0;
    for (int k = 0; k < dense_n; ++k) {
      double target = k * step;
      while (walked + seg[static_cast<size_t>(i)] < target) {
        walked += seg[static_cast<size_t>(i)];
        i = (i + 1) % n;
      }
      double t = seg[static_cast<size_t>(i)] > 0
                     ? (target - walked) / seg[static_cast<size_t>(i)]
                     : 0.0;
      Vec2 a = centerline[static_cast<size_t>(i)];
      Vec2 b = centerline[static_cast<size_t>((i + 1) % n)];
      dense[static_cast<size_t>(k)] = a + (b - a) * t;
    }
  }

  size_t cells = static_cast<size_t>(g.width) * g.height;
  std::vector<double> dist(cells, kInf);
  std::vector<int> owner(cells, -1);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> queue;
  for (int k = 0; k < dense_n; ++k) {
    auto [r, c] = g.pixel(dense[static_cast<size_t>(k)]);
    if (g.wall(r, c)) continue;
    double d0 = (g.center(r, c) - dense[static_cast<size_t>(k)]).norm();
    size_t i = g.idx(r, c);
    if (d0 < dist[i]) {
      dist[i] = d0;
      owner[i] = k;
      queue.emplace(d0, static_cast<int>(i));
    }
  }
  const double diag = g.res * std::sqrt(2.0);
  while (!queue.empty()) {
    auto [d, flat] = queue.top();
    queue.pop();
    if (d > dist[static_cast<size_t>(flat)]) continue;
    int r = flat / g.width, c = flat % g.width;
    for (int k = 0; k < 8; ++k) {
      int rr = r + kDr[k], cc = c + kDc[k];
      if (g.wall(rr, cc)) continue;
      double nd = d + ((kDr[k] != 0 && kDc[k] != 0) ? diag : g.res);
      size_t i = g.idx(rr, cc);
      if (nd < dist[i]) {
        dist[i] = nd;
        owner[i] = owner[static_cast<size_t>(flat)];
        queue.emplace(nd, static_cast<int>(i));
      }
    }
  }

  ProgressField field;
  field.loop_length = total;
  field.value.assign(cells, -1.0);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      size_t i = g.idx(r, c);
      if (g.occupied[i]) continue;
      if (cut[i]) {
        field.value[i] = 0.0;
        continue;
      }
      int win = owner[i];
      if (win < 0) throw TopologyError("free pixel unreachable from the centerline");
      // Exact projection onto the two dense segments adjacent to the winner.
      Vec2 p = g.center(r, c);
      double best_d = kInf, best_arc = win * step;
      for (int s0 : {win - 1, win}) {
        int a = (s0 + dense_n) % dense_n;
        int b = (a + 1) % dense_n;
        Vec2 pa = dense[static_cast<size_t>(a)];
        Vec2 ab = dense[static_cast<size_t>(b)] - pa;
        double len2 = ab.dot(ab);
        double t = len2 > 0 ? std::clamp((p - pa).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Vec2 proj = pa + ab * t;
        double d = (p - proj).norm();
        if (d < best_d) {
          best_d = d;
          best_arc = (a + t) * step;
        }
      }
      double v = best_arc / total;
      field.value[i] = std::clamp(v, 0.0, 1.0 - 1e-9);
    }
  return field;
}

}  // namespace

TrackMetadata read_track_metadata(const std::string& path) {
  auto kv = read_kv_file(path);
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError("track metadata '" + path + "': missing key '" + key + "'");
    return it->second;
  };
  TrackMetadata meta;
  meta.resolution = std::stod(need("resolution_m_per_px"));
  meta.occupied_threshold = std::stoi(need("occupied_threshold"));
  meta.start_pos.x = std::stod(need("start_x_m"));
  meta.start_pos.y = std::stod(need("start_y_m"));
  meta.start_yaw = std::stod(need("start_yaw_rad"));
  meta.direction = need("direction");
  if (meta.resolution <= 0.0)
    throw FormatError("track metadata: resolution_m_per_px must be > 0");
  if (meta.occupied_threshold < 0 || meta.occupied_threshold > 255)
    throw FormatError("track metadata: occupied_threshold must be in [0,255]");
  if (meta.direction != "cw" && meta.direction != "ccw")
    throw FormatError("track metadata: direction must be cw or ccw");
  return meta;
}

ProgressField compute_progress_field(const std::vector<uint8_t>& occupied, int width,
                                     int height, double resolution, Vec2 start_pos,
                                     double start_yaw) {
  Grid g{occupied, width, height, resolution};
  GeoField geo = geodesic_order(g, start_pos, start_yaw);
  std::vector<double> d2 = squared_edt(occupied, width, height);
  std::vector<double> clearance(d2.size());
  for (size_t i = 0; i < d2.size(); ++i) clearance[i] = std::sqrt(d2[i]) * resolution;

  // First pass bins the raw travel distance; its projection field is already
  // arc-ordered, so a second pass yields arc-uniform bins and a centerline
  // that genuinely maximizes clearance per isoline.
  std::vector<Vec2> line =
      centerline_from_order(g, geo.dist, geo.max_dist + resolution, geo.cut, clearance,
                            TrackMap::kDefaultWaypointSpacing, geo.max_dist);
  ProgressField field = project_progress(g, line, geo.cut);
  for (int pass = 0; pass < 3; ++pass) {
    line = centerline_from_order(g, field.value, 1.0, geo.cut, clearance,
                                 TrackMap::kDefaultWaypointSpacing, field.loop_length);
    field = project_progress(g, line, geo.cut);
  }
  return field;
}

TrackMap TrackMap::load(const std::string& image_path, const std::string& meta_path) {
  TrackMap map;
  map.meta_ = read_track_metadata(meta_path);
  GrayImage img = load_gray_image(image_path);
  map.width_ = img.width;
  map.height_ = img.height;
  map.occupied_.resize(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i)
    map.occupied_[i] = img.pixels[i] < map.meta_.occupied_threshold ? 1 : 0;

  auto [sr, sc] = map.pixel_of(map.meta_.start_pos);
  if (map.occupied(sr, sc))
    throw PlacementError("start pose lies on an occupied pixel");

  // Free space must be one connected component containing the start.
  {
    std::vector<uint8_t> seen(map.occupied_.size(), 0);
    std::queue<int> bfs;
    int start_flat = sr * map.width_ + sc;
    seen[static_cast<size_t>(start_flat)] = 1;
    bfs.push(start_flat);
    size_t reached = 0;
    while (!bfs.empty()) {
      int flat = bfs.front();
      bfs.pop();
      ++reached;
      int r = flat / map.width_, c = flat % map.width_;
      for (int k = 0; k < 8; ++k) {
        int rr = r + kDr[k], cc = c + kDc[k];
        if (!map.in_bounds(rr, cc) || map.occupied(rr, cc)) continue;
        size_t i = static_cast<size_t>(rr) * map.width_ + cc;
        if (!seen[i]) {
          seen[i] = 1;
          bfs.push(rr * map.width_ + cc);
        }
      }
    }
    size_t total_free = 0;
    for (uint8_t o : map.occupied_)
      if (!o) ++total_free;
    if (reached != total_free)
      throw TopologyError("disconnected free space: " +
                          std::to_string(total_free - reached) +
                          " free pixels unreachable from the start pose");
  }

  std::vector<double> d2 = squared_edt(map.occupied_, map.width_, map.height_);
  map.clearance_.resize(d2.size());
  for (size_t i = 0; i < d2.size(); ++i)
    map.clearance_[i] = std::sqrt(d2[i]) * map.meta_.resolution;

  map.progress_ = compute_progress_field(map.occupied_, map.width_, map.height_,
                                         map.meta_.resolution, map.meta_.start_pos,
                                         map.meta_.start_yaw);

  map.centerline_ = map.extract_centerline_waypoints(kDefaultWaypointSpacing);
  return map;
}

bool TrackMap::occupied_at(Vec2 p) const {
  auto [r, c] = pixel_of(p);
  return occupied(r, c);
}

std::pair<int, int> TrackMap::pixel_of(Vec2 p) const {
  return {static_cast<int>(std::floor(p.y / meta_.resolution)),
          static_cast<int>(std::floor(p.x / meta_.resolution))};
}

double TrackMap::progress_at(Vec2 p) const {
  auto [r, c] = pixel_of(p);
  if (occupied(r, c))
    throw QueryError("progress query off-track at (" + std::to_string(p.x) + ", " +
                     std::to_string(p.y) + ")");
  return progress_.value[static_cast<size_t>(r) * width_ + c];
}

double TrackMap::clearance_at(Vec2 p) const {
  auto [r, c] = pixel_of(p);
  if (!in_bounds(r, c)) return 0.0;
  return clearance_[static_cast<size_t>(r) * width_ + c];
}

bool TrackMap::is_collision(const OrientedRect& footprint,
                            std::span<const OrientedRect> others) const {
  auto corners = footprint.corners();
  double min_x = corners[0].x, max_x = corners[0].x;
  double min_y = corners[0].y, max_y = corners[0].y;
  for (const Vec2& p : corners) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  // Leaving the mapped area counts as hitting a wall.
  if (min_x < 0 || min_y < 0 || max_x >= width_ * meta_.resolution ||
      max_y >= height_ * meta_.resolution)
    return true;
  int r0 = std::max(0, static_cast<int>(std::floor(min_y / meta_.resolution)));
  int r1 = std::min(height_ - 1, static_cast<int>(std::floor(max_y / meta_.resolution)));
  int c0 = std::max(0, static_cast<int>(std::floor(min_x / meta_.resolution)));
  int c1 = std::min(width_ - 1, static_cast<int>(std::floor(max_x / meta_.resolution)));
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (occupied(r, c) && footprint.contains(pixel_center(r, c))) return true;
  for (const OrientedRect& other : others)
    if (rects_overlap(footprint, other)) return true;
  return false;
}

std::vector<Vec2> TrackMap::extract_centerline_waypoints(double spacing_m) const {
  if (spacing_m <= 0.0 || spacing_m > progress_.loop_length)
    throw ParameterError("waypoint spacing " + std::to_string(spacing_m) +
                         " m exceeds the loop length " +
                         std::to_string(progress_.loop_length) + " m");
  Grid g{occupied_, width_, height_, meta_.resolution};
  std::vector<uint8_t> cut(occupied_.size(), 0);
  for (size_t i = 0; i < occupied_.size(); ++i)
    if (!occupied_[i] && progress_.value[i] == 0.0) cut[i] = 1;
  return centerline_from_order(g, progress_.value, 1.0, cut, clearance_, spacing_m,
                               progress_.loop_length);
}

int TrackMap::nearest_waypoint(Vec2 p) const {
  int best = 0;
  double best_d = kInf;
  for (size_t i = 0; i < centerline_.size(); ++i) {
    double d = (centerline_[i] - p).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double TrackMap::waypoint_tangent(int index) const {
  int n = static_cast<int>(centerline_.size());
  const Vec2& prev = centerline_[static_cast<size_t>((index - 1 + n) % n)];
  const Vec2& next = centerline_[static_cast<size_t>((index + 1) % n)];
  return std::atan2(next.y - prev.y, next.x - prev.x);
}

}  // namespace racelab
