#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "aok/geometry.hpp"

namespace aok::geometry {

namespace {

// Clockwise with y pointing down: W, NW, N, NE, E, SE, S, SW.
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d)
    if (kDx[d] == dx && kDy[d] == dy) return d;
  return -1;
}

using Pixel = std::array<int, 2>;

// Splits a boundary walk at repeated pixels (pinch points of one-pixel
// bridges) and keeps the loop enclosing the most area.
std::vector<Pixel> largest_simple_loop(const std::vector<Pixel>& path) {
  std::vector<std::vector<Pixel>> loops;
  std::vector<Pixel> work;
  std::map<Pixel, std::size_t> where;
  for (const auto& p : path) {
    auto it = where.find(p);
    if (it == where.end()) {
      where.emplace(p, work.size());
      work.push_back(p);
      continue;
    }
    const std::size_t pos = it->second;
    loops.emplace_back(work.begin() + static_cast<std::ptrdiff_t>(pos), work.end());
    for (std::size_t i = pos + 1; i < work.size(); ++i) where.erase(work[i]);
    work.resize(pos + 1);
  }
  loops.push_back(std::move(work));

  auto loop_area = [](const std::vector<Pixel>& loop) {
    std::vector<Point2> pts;
    pts.reserve(loop.size());
    for (const auto& p : loop) pts.push_back({double(p[0]), double(p[1])});
    return std::abs(signed_area(pts));
  };
  std::size_t best = 0;
  double best_area = -1.0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const double a = loop_area(loops[i]);
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  return loops[best];
}

struct Component {
  std::vector<std::size_t> pixels;
};

std::vector<Component> components_4(std::span<const std::uint8_t> grid, int nx, int ny) {
  std::vector<int> label(grid.size(), -1);
  std::vector<Component> comps;
  std::deque<std::size_t> queue;
  for (std::size_t start = 0; start < grid.size(); ++start) {
    if (!grid[start] || label[start] >= 0) continue;
    Component comp;
    const int id = static_cast<int>(comps.size());
    label[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t idx = queue.front();
      queue.pop_front();
      comp.pixels.push_back(idx);
      const int x = static_cast<int>(idx % static_cast<std::size_t>(nx));
      const int y = static_cast<int>(idx / static_cast<std::size_t>(nx));
      const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= nx || q[1] >= ny) continue;
        const std::size_t qi = static_cast<std::size_t>(q[1]) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(q[0]);
        if (grid[qi] && label[qi] < 0) {
          label[qi] = id;
          queue.push_back(qi);
        }
      }
    }
    std::sort(comp.pixels.begin(), comp.pixels.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace

std::vector<std::array<int, 2>> moore_trace(std::span<const std::uint8_t> grid, int nx, int ny) {
  if (nx <= 0 || ny <= 0 || grid.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw ValidationError("moore_trace: grid size does not match dims");
  auto fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < nx && y < ny &&
           grid[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)] != 0;
  };

  auto first = std::find_if(grid.begin(), grid.end(), [](std::uint8_t v) { return v != 0; });
  if (first == grid.end()) return {};
  const auto first_idx = static_cast<std::size_t>(first - grid.begin());
  const Pixel start{static_cast<int>(first_idx % static_cast<std::size_t>(nx)),
                    static_cast<int>(first_idx / static_cast<std::size_t>(nx))};

  std::vector<Pixel> path{start};
  Pixel p = start;
  int backtrack = 0;  // west of the raster-first pixel is background
  bool have_first = false;
  Pixel first_next{};
  const std::size_t limit = 4 * grid.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int t = 1; t <= 8; ++t) {
      const int d = (backtrack + t) % 8;
      if (fg(p[0] + kDx[d], p[1] + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) return path;  // isolated pixel

    const Pixel next{p[0] + kDx[found], p[1] + kDy[found]};
    const int prev_dir = (found + 7) % 8;
    const Pixel prev{p[0] + kDx[prev_dir], p[1] + kDy[prev_dir]};

    // Jacob's criterion: stop on re-entering the start the same way.
    if (have_first && p == start && next == first_next) break;
    if (!have_first) {
      have_first = true;
      first_next = next;
    }
    path.push_back(next);
    backtrack = direction_of(prev[0] - next[0], prev[1] - next[1]);
    p = next;
  }
  if (path.size() > 1 && path.back() == start) path.pop_back();
  return path;
}

ContourStack3D mask_to_stack(const Mask3D& mask, const MaskToStackOptions& options) {
  const auto [nx, ny, nz] = mask.dims();
  const auto [sx, sy, sz] = mask.spacing();
  const std::size_t plane = nx * ny;
  const auto vox = mask.voxels();

  std::vector<ContourStack3D::Slice> slices;
  std::vector<std::size_t> multi;
  bool any = false;
  for (std::size_t k = 0; k < nz; ++k) {
    auto slice = vox.subspan(k * plane, plane);
    if (std::none_of(slice.begin(), slice.end(), [](std::uint8_t v) { return v != 0; })) continue;
    any = true;

    auto comps = components_4(slice, static_cast<int>(nx), static_cast<int>(ny));
    if (comps.size() > 1 && !options.largest_component_only) {
      multi.push_back(k);
      continue;
    }
    const Component& comp = *std::max_element(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
      return a.pixels.size() < b.pixels.size();
    });

    std::vector<std::uint8_t> grid(plane, 0);
    for (auto idx : comp.pixels) grid[idx] = 1;
    auto loop = largest_simple_loop(moore_trace(grid, static_cast<int>(nx), static_cast<int>(ny)));

    std::vector<Point2> pts;
    pts.reserve(loop.size());
    for (const auto& px : loop) pts.push_back({px[0] * sx, px[1] * sy});

    if (pts.size() < 3 || std::abs(signed_area(pts)) < 1e-9) {
      // Straight runs of pixels trace to a line; use their pixel-corner
      // rectangle instead.
      int x0 = static_cast<int>(nx), x1 = -1, y0 = static_cast<int>(ny), y1 = -1;
      for (auto idx : comp.pixels) {
        const int x = static_cast<int>(idx % nx), y = static_cast<int>(idx / nx);
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
      pts = {{(x0 - 0.5) * sx, (y0 - 0.5) * sy},
             {(x1 + 0.5) * sx, (y0 - 0.5) * sy},
             {(x1 + 0.5) * sx, (y1 + 0.5) * sy},
             {(x0 - 0.5) * sx, (y1 + 0.5) * sy}};
    }

    if (options.calibrate_area) {
      const double target = static_cast<double>(comp.pixels.size()) * sx * sy;
      const double traced = std::abs(signed_area(pts));
      const double f = std::sqrt(target / traced);
      const Point2 c = polygon_centroid(pts);
      for (auto& q : pts) q = {c.x + f * (q.x - c.x), c.y + f * (q.y - c.y)};
    }
    try {
      slices.push_back({static_cast<double>(k) * sz, Contour2D(std::move(pts))});
    } catch (const ValidationError& e) {
      throw ValidationError("slice " + std::to_string(k) + ": " + e.what());
    }
  }

  if (!any) throw ValidationError("mask has no foreground voxels");
  if (!multi.empty()) {
    std::ostringstream msg;
    msg << "multiple connected components in slice(s)";
    for (auto k : multi) msg << ' ' << k;
    msg << " (use largest_component_only to keep the largest)";
    throw ValidationError(msg.str());
  }
  return ContourStack3D(std::move(slices));
}

}  // namespace aok::geometry
