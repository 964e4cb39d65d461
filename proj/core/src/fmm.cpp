#include "fastsum/fmm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fastsum::fmm {

namespace {

int bin_coord(double x, double lo, double width, int n) {
  // half-open boxes; a point on an interior boundary lands in the larger
  // index, the top/right domain edge is closed
  int i = static_cast<int>(std::floor((x - lo) / width));
  if (i < 0) i = 0;
  if (i >= n) i = n - 1;
  return i;
}

}  // namespace

GridDecomposition build_grid(std::span<const Particle> particles, const FmmConfig& config) {
  if (config.p < 1) throw std::invalid_argument("build_grid: p must be >= 1");
  if (config.level < 2) throw std::invalid_argument("build_grid: level must be >= 2");
  if (config.domain.lo.size() != 2 || config.domain.hi.size() != 2) {
    throw std::invalid_argument("build_grid: domain must be 2D");
  }
  const double wx = config.domain.hi[0] - config.domain.lo[0];
  const double wy = config.domain.hi[1] - config.domain.lo[1];
  if (!(wx > 0.0) || !(wy > 0.0)) throw std::invalid_argument("build_grid: degenerate domain");
  if (std::abs(wx - wy) > 1e-12 * std::max(wx, wy)) {
    throw std::invalid_argument("build_grid: domain must be square");
  }

  GridDecomposition grid;
  grid.level = config.level;
  grid.boxes_per_side = 1 << config.level;
  grid.box_width = wx / grid.boxes_per_side;
  grid.origin_x = config.domain.lo[0];
  grid.origin_y = config.domain.lo[1];
  grid.members.assign(static_cast<std::size_t>(grid.box_count()), {});

  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double x = particles[i].position.real();
    const double y = particles[i].position.imag();
    if (x < config.domain.lo[0] || x > config.domain.hi[0] || y < config.domain.lo[1] ||
        y > config.domain.hi[1]) {
      throw out_of_domain_error(i, "build_grid: particle " + std::to_string(i) +
                                       " lies outside the domain");
    }
    const int ix = bin_coord(x, grid.origin_x, grid.box_width, grid.boxes_per_side);
    const int iy = bin_coord(y, grid.origin_y, grid.box_width, grid.boxes_per_side);
    grid.members[static_cast<std::size_t>(grid.box_id(ix, iy))].push_back(static_cast<int>(i));
  }
  return grid;
}

std::vector<int> interaction_list_hierarchical(const GridDecomposition& grid, int box,
                                               bool periodic) {
  const int n = grid.boxes_per_side;
  if (box < 0 || box >= grid.box_count()) {
    throw std::invalid_argument("interaction_list_hierarchical: invalid box id");
  }
  const int ix = box % n;
  const int iy = box / n;
  const int px = ix / 2, py = iy / 2;
  const int np = n / 2;

  auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
  auto cheb_dist = [&](int ax, int ay, int bx, int by) {
    int dx = std::abs(ax - bx);
    int dy = std::abs(ay - by);
    if (periodic) {
      dx = std::min(dx, n - dx);
      dy = std::min(dy, n - dy);
    }
    return std::max(dx, dy);
  };

  std::vector<int> out;
  out.reserve(36);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      int qx = px + dx, qy = py + dy;
      if (periodic) {
        qx = wrap(qx, np);
        qy = wrap(qy, np);
      } else if (qx < 0 || qx >= np || qy < 0 || qy >= np) {
        continue;
      }
      for (int cy = 0; cy < 2; ++cy) {
        for (int cx = 0; cx < 2; ++cx) {
          const int jx = 2 * qx + cx;
          const int jy = 2 * qy + cy;
          if (cheb_dist(ix, iy, jx, jy) <= 1) continue;
          out.push_back(grid.box_id(jx, jy));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TranslationPlan far_pairs_single_level(const GridDecomposition& grid) {
  const int n = grid.boxes_per_side;
  TranslationPlan plan;
  for (int ty = 0; ty < n; ++ty) {
    for (int tx = 0; tx < n; ++tx) {
      const int tgt = grid.box_id(tx, ty);
      if (grid.members[static_cast<std::size_t>(tgt)].empty()) continue;
      for (int sy = 0; sy < n; ++sy) {
        for (int sx = 0; sx < n; ++sx) {
          if (std::max(std::abs(sx - tx), std::abs(sy - ty)) <= 1) continue;
          const int src = grid.box_id(sx, sy);
          if (grid.members[static_cast<std::size_t>(src)].empty()) continue;
          plan.pairs.emplace_back(src, tgt);
        }
      }
    }
  }
  // target-major with ascending sources
  std::sort(plan.pairs.begin(), plan.pairs.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
  return plan;
}

TranslationPlan idealized_periodic_plan(int level, std::uint64_t max_pairs) {
  if (level < 2) throw std::invalid_argument("idealized_periodic_plan: level must be >= 2");
  GridDecomposition grid;
  grid.level = level;
  grid.boxes_per_side = 1 << level;
  grid.box_width = 1.0 / grid.boxes_per_side;
  grid.members.assign(static_cast<std::size_t>(grid.box_count()), {});

  TranslationPlan plan;
  const int total = grid.box_count();
  for (int tgt = 0; tgt < total; ++tgt) {
    auto list = interaction_list_hierarchical(grid, tgt, /*periodic=*/true);
    for (int src : list) {
      if (plan.pairs.size() >= max_pairs) return plan;
      plan.pairs.emplace_back(src, tgt);
    }
  }
  return plan;
}

}  // namespace fastsum::fmm
