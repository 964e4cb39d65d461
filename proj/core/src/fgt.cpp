#include "fastsum/fgt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastsum::fgt {

namespace {

constexpr int kMaxHermiteOrder = 63;

//! Physicists' Hermite polynomial coefficients up to order 63, built once via
//! H_{n+1} = 2t H_n - 2n H_{n-1} and stored highest degree first.
class HermitePolyTable {
 public:
  HermitePolyTable() {
    rows_.resize(kMaxHermiteOrder + 1);
    std::vector<std::vector<double>> low(static_cast<std::size_t>(kMaxHermiteOrder) + 1);
    low[0] = {1.0};
    low[1] = {0.0, 2.0};
    for (int n = 1; n < kMaxHermiteOrder; ++n) {
      const auto nn = static_cast<std::size_t>(n);
      std::vector<double> next(nn + 2, 0.0);
      for (std::size_t k = 0; k < low[nn].size(); ++k) next[k + 1] += 2.0 * low[nn][k];
      for (std::size_t k = 0; k < low[nn - 1].size(); ++k) next[k] -= 2.0 * n * low[nn - 1][k];
      low[nn + 1] = std::move(next);
    }
    for (int n = 0; n <= kMaxHermiteOrder; ++n) {
      const auto nn = static_cast<std::size_t>(n);
      rows_[nn].assign(low[nn].rbegin(), low[nn].rend());
    }
  }

  std::span<const double> row(int n) const { return rows_[static_cast<std::size_t>(n)]; }

 private:
  std::vector<std::vector<double>> rows_;
};

const HermitePolyTable& poly_table() {
  static const HermitePolyTable table;
  return table;
}

void validate_config(const FgtConfig& config) {
  if (!(config.sigma > 0.0)) throw std::invalid_argument("fgt: sigma must be > 0");
  if (config.p < 1) throw std::invalid_argument("fgt: p must be >= 1");
  if (config.dimension < 1 || config.dimension > 3) {
    throw std::invalid_argument("fgt: dimension must be 1..3");
  }
  if (!(config.r > 0.0) || config.r > 1.0) throw std::invalid_argument("fgt: r must be in (0,1]");
  if (!(config.eps_cut > 0.0) || !(config.eps_cut < 1.0)) {
    throw std::invalid_argument("fgt: eps_cut must be in (0,1)");
  }
}

}  // namespace

std::span<const double> hermite_poly_coeffs(int n) {
  if (n < 0 || n > kMaxHermiteOrder) {
    throw std::range_error("hermite_poly_coeffs: order must be in [0,63]");
  }
  return poly_table().row(n);
}

double hermite_function(int n, double t, HermiteBackend backend) {
  if (n < 0 || n > kMaxHermiteOrder) {
    throw std::range_error("hermite_function: order must be in [0,63]");
  }
  double out[kMaxHermiteOrder + 1];
  detail::fill_hermite<double>(t, n + 1, out, backend);
  return out[n];
}

std::vector<double> direct_gauss(std::span<const GaussianSource> sources,
                                 std::span<const std::array<double, 3>> targets, double sigma,
                                 int dimension) {
  if (!(sigma > 0.0)) throw std::invalid_argument("direct_gauss: sigma must be > 0");
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("direct_gauss: dimension must be 1..3");
  }
  const double two_sigma_sq = 2.0 * sigma * sigma;
  std::vector<double> out(targets.size(), 0.0);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    double acc = 0.0;
    for (const auto& s : sources) {
      double r2 = 0.0;
      for (int k = 0; k < dimension; ++k) {
        const double diff =
            s.position[static_cast<std::size_t>(k)] - targets[j][static_cast<std::size_t>(k)];
        r2 += diff * diff;
      }
      acc += s.weight * std::exp(-r2 / two_sigma_sq);
    }
    out[j] = acc;
  }
  return out;
}

FgtGrid build_fgt_grid(std::span<const GaussianSource> sources,
                       std::span<const std::array<double, 3>> targets,
                       const FgtConfig& config) {
  validate_config(config);
  const int d = config.dimension;
  FgtGrid grid;
  grid.dimension = d;
  grid.side = config.r * std::sqrt(2.0) * config.sigma;

  std::array<double, 3> lo{}, hi{};
  bool any = false;
  auto absorb = [&](const std::array<double, 3>& pos) {
    for (int j = 0; j < d; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!std::isfinite(pos[ju])) {
        throw std::invalid_argument("build_fgt_grid: non-finite coordinate");
      }
      if (!any) continue;
      lo[ju] = std::min(lo[ju], pos[ju]);
      hi[ju] = std::max(hi[ju], pos[ju]);
    }
    if (!any) {
      for (int j = 0; j < d; ++j) {
        lo[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j)];
        hi[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j)];
      }
      any = true;
    }
  };
  for (const auto& s : sources) absorb(s.position);
  for (const auto& t : targets) absorb(t);
  if (!any) {
    grid.box_sources.assign(1, {});
    grid.box_targets.assign(1, {});
    return grid;
  }

  for (int j = 0; j < d; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    grid.origin[ju] = lo[ju];
    const double extent = hi[ju] - lo[ju];
    grid.boxes_per_axis[ju] =
        std::max(1, static_cast<int>(std::ceil(extent / grid.side)));
  }

  const auto n_boxes = static_cast<std::size_t>(grid.box_count());
  grid.box_sources.assign(n_boxes, {});
  grid.box_targets.assign(n_boxes, {});

  auto bin = [&](const std::array<double, 3>& pos) {
    std::array<int, 3> c{0, 0, 0};
    for (int j = 0; j < d; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      int i = static_cast<int>(std::floor((pos[ju] - grid.origin[ju]) / grid.side));
      if (i < 0) i = 0;
      if (i >= grid.boxes_per_axis[ju]) i = grid.boxes_per_axis[ju] - 1;
      c[ju] = i;
    }
    return grid.box_id(c);
  };
  for (std::size_t i = 0; i < sources.size(); ++i) {
    grid.box_sources[static_cast<std::size_t>(bin(sources[i].position))].push_back(
        static_cast<int>(i));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    grid.box_targets[static_cast<std::size_t>(bin(targets[i]))].push_back(static_cast<int>(i));
  }
  return grid;
}

int neighbor_cutoff(const FgtConfig& config) {
  validate_config(config);
  const double side = config.r * std::sqrt(2.0) * config.sigma;
  const double log_cut = std::log(1.0 / config.eps_cut);
  // far when (n*side)^2 / (2 sigma^2) >= ln(1/eps); tiny relative slack keeps
  // exact-boundary cases (e.g. eps = e^{-9} with r = 1) on the intended side
  auto far_enough = [&](int m) {
    const double a = m * side;
    return a * a / (2.0 * config.sigma * config.sigma) >= log_cut * (1.0 - 1e-12);
  };
  int n = static_cast<int>(std::ceil(std::sqrt(2.0 * log_cut) * config.sigma / side));
  if (n < 0) n = 0;
  while (n > 0 && far_enough(n - 1)) --n;
  while (!far_enough(n)) ++n;
  return n;
}

std::array<double, 4> strategy_costs(std::uint64_t n_src, std::uint64_t n_tgt, int p, int d) {
  if (p < 1 || d < 1 || d > 3) throw std::invalid_argument("strategy_costs: bad p or d");
  const double k_direct = 3.0 * d + 25.0;
  const double k_term = d + 1.0;
  double pd = 1.0;
  for (int j = 0; j < d; ++j) pd *= p;
  const auto ns = static_cast<double>(n_src);
  const auto nt = static_cast<double>(n_tgt);
  return {
      k_direct * ns * nt,   // direct
      k_term * nt * pd,     // hermite
      k_term * ns * pd,     // taylor
      k_term * pd * pd,     // hermite_to_taylor
  };
}

Strategy select_strategy(std::uint64_t n_src, std::uint64_t n_tgt, int p, int d) {
  const auto costs = strategy_costs(n_src, n_tgt, p, d);
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (costs[static_cast<std::size_t>(i)] < costs[static_cast<std::size_t>(best)]) best = i;
  }
  return static_cast<Strategy>(best);
}

}  // namespace fastsum::fgt
