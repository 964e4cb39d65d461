#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fastsum/counters.hpp"
#include "fastsum/dataset.hpp"
#include "fastsum/errors.hpp"
#include "fastsum/parallel.hpp"

namespace fastsum::fmm {

//! Order in which the translation matrix is walked. Both produce the same
//! coefficients up to rounding; they differ in how binomial and power factors
//! are reused.
enum class Traversal { diagonal, row };

struct FmmConfig {
  int p = 12;                            // truncation terms per expansion
  int level = 3;                         // grid refinement, >= 2
  Traversal traversal = Traversal::row;
  Box domain;                            // axis-aligned square
};

//! Uniform 2^l x 2^l box decomposition. Box id = iy * boxes_per_side + ix,
//! with (ix, iy) counted from the domain's lower-left corner.
struct GridDecomposition {
  int level = 0;
  int boxes_per_side = 0;
  double box_width = 0.0;
  double origin_x = 0.0, origin_y = 0.0;
  std::vector<std::vector<int>> members;  // box id -> particle indices

  int box_count() const { return boxes_per_side * boxes_per_side; }
  int box_id(int ix, int iy) const { return iy * boxes_per_side + ix; }
  double half_width() const { return 0.5 * box_width; }
  std::complex<double> box_center(int id) const {
    const int ix = id % boxes_per_side;
    const int iy = id / boxes_per_side;
    return {origin_x + (ix + 0.5) * box_width, origin_y + (iy + 0.5) * box_width};
  }
};

template <class Real>
struct MultipoleExpansionT {
  std::complex<Real> center{};
  std::vector<std::complex<Real>> coeffs;  // m_0 .. m_{p-1}
};

template <class Real>
struct LocalExpansionT {
  std::complex<Real> center{};
  std::vector<std::complex<Real>> coeffs;  // l_0 .. l_{p-1}
};

using MultipoleExpansion = MultipoleExpansionT<double>;
using LocalExpansion = LocalExpansionT<double>;

//! Ordered far-field pairs (source box, target box), sorted by target then
//! source id; accumulation in that order is the deterministic reduction.
struct TranslationPlan {
  std::vector<std::pair<int, int>> pairs;  // (source, target)
};

// --- grid + planning ------------------------------------------------------

//! Bins particles to level-l boxes. Half-open boxes: a point exactly on an
//! interior boundary belongs to the box with the larger index; the domain's
//! top/right edges are closed.
GridDecomposition build_grid(std::span<const Particle> particles, const FmmConfig& config);

//! Same-level boxes that are children of the box's parent's Moore neighbors
//! (parent included) and not Moore-adjacent to the box. With periodic = true
//! indices wrap, giving exactly 27 entries for level >= 3.
std::vector<int> interaction_list_hierarchical(const GridDecomposition& grid, int box,
                                               bool periodic);

//! All ordered (source, target) pairs of distinct non-empty boxes that are not
//! Moore-adjacent. The 3x3 Moore neighborhood is the near field, handled by P2P.
TranslationPlan far_pairs_single_level(const GridDecomposition& grid);

//! Full periodic interaction plan for an idealized level-l grid: every box is
//! a target with exactly 27 sources. Pair count is 4^l * 27. Pairs are emitted
//! target-major, sources ascending; generation stops after max_pairs.
TranslationPlan idealized_periodic_plan(int level,
                                        std::uint64_t max_pairs = UINT64_MAX);

// --- op model --------------------------------------------------------------
// Arithmetic counters use: complex multiply = 6, complex add = 2, real
// multiply/add/divide = 1. The per-translation count is derived from the
// row-traversal loop (reciprocal 6, p-1 row power carries at 6, and per row:
// p-1 binomial updates at 2, p-1 power carries at 6, p scalings at 2 and p
// accumulates at 8) and is used for both traversals.

inline std::uint64_t m2l_ops_per_translation(int p) {
  const auto pp = static_cast<std::uint64_t>(p);
  return 18 * pp * pp - 2 * pp;
}

inline constexpr std::uint64_t kOpsPerP2PInteraction = 12;
inline std::uint64_t p2m_ops(int p, std::uint64_t sources) {
  return sources * (10 * static_cast<std::uint64_t>(p - 1) + 1);
}
inline std::uint64_t l2p_ops(int p) { return 8 * static_cast<std::uint64_t>(p - 1) + 2; }

// --- kernels ---------------------------------------------------------------

//! m_k = sum_i q_i (z_i - center)^k, k = 0..p-1. The far field of the sources
//! is then sum_k m_k (z - center)^{-k-1}.
template <class Real>
MultipoleExpansionT<Real> p2m(std::span<const Particle> sources, std::complex<Real> center,
                              int p) {
  if (p < 1) throw std::invalid_argument("p2m: p must be >= 1");
  MultipoleExpansionT<Real> me;
  me.center = center;
  me.coeffs.assign(static_cast<std::size_t>(p), std::complex<Real>{});
  for (const Particle& s : sources) {
    const std::complex<Real> z(static_cast<Real>(s.position.real()),
                               static_cast<Real>(s.position.imag()));
    const Real q = static_cast<Real>(s.weight);
    std::complex<Real> pw(Real(1), Real(0));
    const std::complex<Real> dz = z - center;
    me.coeffs[0] += q;
    for (int k = 1; k < p; ++k) {
      pw *= dz;
      me.coeffs[static_cast<std::size_t>(k)] += q * pw;
    }
  }
  return me;
}

//! Translation-matrix element a_nk = (-1)^n binom(n+k, k) t^{-k-n-1} with
//! t the target-minus-source center offset.
template <class Real>
std::complex<Real> m2l_element(int n, int k, std::complex<Real> t) {
  if (n < 0 || k < 0) throw std::invalid_argument("m2l_element: negative index");
  if (t == std::complex<Real>{}) {
    throw singular_translation_error("m2l_element: coincident centers (t = 0)");
  }
  const std::complex<Real> inv = Real(1) / t;
  std::complex<Real> pw(Real(1), Real(0));
  for (int i = 0; i < n + k + 1; ++i) pw *= inv;
  Real b(1);
  for (int i = 1; i <= k; ++i) b = b * static_cast<Real>(n + i) / static_cast<Real>(i);
  if (n & 1) b = -b;
  return b * pw;
}

namespace detail {

template <class Real>
void m2l_row(std::span<const std::complex<Real>> m, std::complex<Real> inv,
             std::span<std::complex<Real>> l, int p) {
  // Two-step power scheme in sequential form: carry t^{-(n+1)} across rows,
  // then multiply the k extra common factors inside the row.
  std::complex<Real> row_pw = inv;
  for (int n = 0; n < p; ++n) {
    if (n > 0) row_pw *= inv;
    std::complex<Real> cur = row_pw;
    Real b = (n & 1) ? Real(-1) : Real(1);
    std::complex<Real> acc{};
    for (int k = 0; k < p; ++k) {
      if (k > 0) {
        b = b * static_cast<Real>(n + k) / static_cast<Real>(k);
        cur *= inv;
      }
      acc += (b * cur) * m[static_cast<std::size_t>(k)];
    }
    l[static_cast<std::size_t>(n)] += acc;
  }
}

template <class Real>
void m2l_diagonal(std::span<const std::complex<Real>> m, std::complex<Real> inv,
                  std::span<std::complex<Real>> l, int p) {
  // Anti-diagonals n + k = s share the power t^{-s-1}; binomials update
  // Pascal-style from the previous diagonal.
  std::vector<Real> binom(static_cast<std::size_t>(p), Real(0));
  binom[0] = Real(1);
  std::complex<Real> diag_pw = inv;
  for (int s = 0; s <= 2 * (p - 1); ++s) {
    if (s > 0) {
      diag_pw *= inv;
      for (int k = std::min(s, p - 1); k >= 1; --k) {
        binom[static_cast<std::size_t>(k)] += binom[static_cast<std::size_t>(k - 1)];
      }
    }
    const int k_lo = std::max(0, s - (p - 1));
    const int k_hi = std::min(s, p - 1);
    for (int k = k_lo; k <= k_hi; ++k) {
      const int n = s - k;
      Real b = binom[static_cast<std::size_t>(k)];
      if (n & 1) b = -b;
      l[static_cast<std::size_t>(n)] += (b * diag_pw) * m[static_cast<std::size_t>(k)];
    }
  }
}

}  // namespace detail

//! l_n = sum_k a_nk m_k about local_center, with t = local_center - me.center.
template <class Real>
LocalExpansionT<Real> m2l_translate(const MultipoleExpansionT<Real>& me,
                                    std::complex<Real> local_center, int p,
                                    Traversal traversal) {
  if (p < 1) throw std::invalid_argument("m2l_translate: p must be >= 1");
  const std::complex<Real> t = local_center - me.center;
  if (t == std::complex<Real>{}) {
    throw singular_translation_error("m2l_translate: coincident centers");
  }
  LocalExpansionT<Real> le;
  le.center = local_center;
  le.coeffs.assign(static_cast<std::size_t>(p), std::complex<Real>{});
  const std::complex<Real> inv = Real(1) / t;
  if (traversal == Traversal::row) {
    detail::m2l_row<Real>(me.coeffs, inv, le.coeffs, p);
  } else {
    detail::m2l_diagonal<Real>(me.coeffs, inv, le.coeffs, p);
  }
  return le;
}

template <class Real>
struct M2lBatchResult {
  std::vector<LocalExpansionT<Real>> locals;  // box id -> LE; empty coeffs = absent
  KernelCounters counters;
  double translate_seconds = 0.0;
  double reduce_seconds = 0.0;
};

//! Batched M2L with reduction: for each target box the LE is the
//! coefficient-wise sum over its interaction list, accumulated in ascending
//! source-id order. Targets are distributed across workers; each target is
//! owned by exactly one worker, so the result is bit-identical for any thread
//! count. Work is chunked so the scratch of translated LEs stays within
//! working_set_bytes.
template <class Real>
M2lBatchResult<Real> m2l_batch(const TranslationPlan& plan,
                               std::span<const MultipoleExpansionT<Real>> expansions,
                               std::span<const std::complex<Real>> centers, int p,
                               Traversal traversal, int threads = 1,
                               std::size_t working_set_bytes = kDefaultWorkingSetBytes) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  for (const auto& [src, tgt] : plan.pairs) {
    if (src < 0 || static_cast<std::size_t>(src) >= expansions.size() ||
        expansions[static_cast<std::size_t>(src)].coeffs.empty()) {
      throw plan_consistency_error("m2l_batch: plan references source box " +
                                   std::to_string(src) + " with no expansion");
    }
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= centers.size()) {
      throw std::invalid_argument("m2l_batch: target box id out of range");
    }
  }

  // group pairs by target; plan is sorted by (target, source)
  struct TargetRange {
    int target;
    std::size_t begin, end;
  };
  std::vector<TargetRange> groups;
  for (std::size_t i = 0; i < plan.pairs.size();) {
    std::size_t j = i;
    while (j < plan.pairs.size() && plan.pairs[j].second == plan.pairs[i].second) ++j;
    groups.push_back({plan.pairs[i].second, i, j});
    i = j;
  }

  M2lBatchResult<Real> res;
  res.locals.assign(centers.size(), LocalExpansionT<Real>{});

  const std::size_t le_bytes = 2 * static_cast<std::size_t>(p) * sizeof(Real);
  const std::size_t chunk_cap = std::max<std::size_t>(1, working_set_bytes / le_bytes);

  std::vector<std::int64_t> translate_ns(groups.size(), 0);
  std::vector<std::int64_t> reduce_ns(groups.size(), 0);

  parallel_for(groups.size(), threads, [&](std::size_t gi) {
    const auto& g = groups[gi];
    LocalExpansionT<Real>& out = res.locals[static_cast<std::size_t>(g.target)];
    out.center = centers[static_cast<std::size_t>(g.target)];
    out.coeffs.assign(static_cast<std::size_t>(p), std::complex<Real>{});

    std::vector<std::complex<Real>> scratch(chunk_cap * static_cast<std::size_t>(p));
    for (std::size_t cs = g.begin; cs < g.end; cs += chunk_cap) {
      const std::size_t ce = std::min(g.end, cs + chunk_cap);
      const auto t0 = clock::now();
      for (std::size_t i = cs; i < ce; ++i) {
        const auto& me = expansions[static_cast<std::size_t>(plan.pairs[i].first)];
        std::span<std::complex<Real>> slot(&scratch[(i - cs) * static_cast<std::size_t>(p)],
                                           static_cast<std::size_t>(p));
        std::fill(slot.begin(), slot.end(), std::complex<Real>{});
        const std::complex<Real> t = out.center - me.center;
        if (t == std::complex<Real>{}) {
          throw singular_translation_error("m2l_batch: coincident centers");
        }
        const std::complex<Real> inv = Real(1) / t;
        if (traversal == Traversal::row) {
          detail::m2l_row<Real>(me.coeffs, inv, slot, p);
        } else {
          detail::m2l_diagonal<Real>(me.coeffs, inv, slot, p);
        }
      }
      const auto t1 = clock::now();
      for (std::size_t i = cs; i < ce; ++i) {
        const std::complex<Real>* slot = &scratch[(i - cs) * static_cast<std::size_t>(p)];
        for (int k = 0; k < p; ++k) {
          out.coeffs[static_cast<std::size_t>(k)] += slot[k];
        }
      }
      const auto t2 = clock::now();
      translate_ns[gi] += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
      reduce_ns[gi] += std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
    }
  });

  const auto t_end = clock::now();
  const double wall = std::chrono::duration<double>(t_end - t_start).count();

  const auto n_pairs = static_cast<std::uint64_t>(plan.pairs.size());
  res.counters.arithmetic_ops = n_pairs * m2l_ops_per_translation(p);
  res.counters.bytes_read = n_pairs * le_bytes;     // one ME load per translation
  res.counters.bytes_written = n_pairs * le_bytes;  // one LE result per translation
  res.counters.elapsed_seconds = wall;

  std::int64_t tt = 0, tr = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    tt += translate_ns[g];
    tr += reduce_ns[g];
  }
  if (tt + tr > 0) {
    res.translate_seconds = wall * static_cast<double>(tt) / static_cast<double>(tt + tr);
    res.reduce_seconds = wall - res.translate_seconds;
  } else {
    res.translate_seconds = wall;
  }
  return res;
}

//! LE evaluation: sum_n l_n (z - center)^n by the complex Horner pattern.
template <class Real>
std::complex<Real> l2p(const LocalExpansionT<Real>& le, std::complex<Real> z) {
  if (le.coeffs.empty()) return {};
  const std::complex<Real> u = z - le.center;
  std::complex<Real> acc = le.coeffs.back();
  for (std::size_t n = le.coeffs.size() - 1; n-- > 0;) {
    acc = le.coeffs[n] + u * acc;
  }
  return acc;
}

//! Direct evaluation f(y) = sum_i q_i / (y - z_i); exactly coincident
//! source-target pairs are skipped (self-interaction exclusion).
template <class Real>
std::vector<std::complex<Real>> p2p(std::span<const Particle> sources,
                                    std::span<const std::complex<Real>> targets) {
  std::vector<std::complex<Real>> out(targets.size(), std::complex<Real>{});
  for (std::size_t j = 0; j < targets.size(); ++j) {
    std::complex<Real> acc{};
    for (const Particle& s : sources) {
      const std::complex<Real> z(static_cast<Real>(s.position.real()),
                                 static_cast<Real>(s.position.imag()));
      const std::complex<Real> d = targets[j] - z;
      if (d == std::complex<Real>{}) continue;
      acc += static_cast<Real>(s.weight) / d;
    }
    out[j] = acc;
  }
  return out;
}

template <class Real>
struct FmmResult {
  std::vector<std::complex<Real>> field;  // per input particle
  KernelCounters counters;                // compute stages (P2M, M2L, near field, L2P)
  double setup_seconds = 0.0;             // grid build + interaction planning
  double m2l_translate_seconds = 0.0;
  double m2l_reduce_seconds = 0.0;
};

//! Single-level pipeline: P2M per non-empty box, M2L over all non-adjacent
//! box pairs with reduction, then per particle L2P of the box LE plus direct
//! P2P over the Moore neighborhood. Deterministic for any worker count.
template <class Real>
FmmResult<Real> fmm_evaluate(std::span<const Particle> particles, const FmmConfig& config,
                             int threads = 1,
                             std::size_t working_set_bytes = kDefaultWorkingSetBytes) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const GridDecomposition grid = build_grid(particles, config);
  const TranslationPlan plan = far_pairs_single_level(grid);
  const auto n_boxes = static_cast<std::size_t>(grid.box_count());
  const auto t1 = clock::now();

  // P2M for every non-empty box
  std::vector<MultipoleExpansionT<Real>> mes(n_boxes);
  std::vector<std::complex<Real>> centers(n_boxes);
  for (std::size_t b = 0; b < n_boxes; ++b) {
    const auto c = grid.box_center(static_cast<int>(b));
    centers[b] = {static_cast<Real>(c.real()), static_cast<Real>(c.imag())};
  }
  std::uint64_t p2m_sources = 0;
  parallel_for(n_boxes, threads, [&](std::size_t b) {
    if (grid.members[b].empty()) return;
    std::vector<Particle> box_particles;
    box_particles.reserve(grid.members[b].size());
    for (int idx : grid.members[b]) box_particles.push_back(particles[static_cast<std::size_t>(idx)]);
    mes[b] = p2m<Real>(box_particles, centers[b], config.p);
  });
  for (std::size_t b = 0; b < n_boxes; ++b) p2m_sources += grid.members[b].size();
  const auto t2 = clock::now();

  auto batch = m2l_batch<Real>(plan, mes, centers, config.p, config.traversal, threads,
                               working_set_bytes);
  const auto t3 = clock::now();

  // near field + L2P, parallel over target boxes
  std::vector<std::complex<Real>> field(particles.size(), std::complex<Real>{});
  std::uint64_t near_interactions = 0;
  const int n = grid.boxes_per_side;
  std::vector<std::uint64_t> near_count(n_boxes, 0);
  parallel_for(n_boxes, threads, [&](std::size_t b) {
    if (grid.members[b].empty()) return;
    const int ix = static_cast<int>(b) % n;
    const int iy = static_cast<int>(b) / n;
    // gather Moore-neighborhood source boxes, ascending id
    std::vector<int> near_boxes;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= n || jy < 0 || jy >= n) continue;
        near_boxes.push_back(grid.box_id(jx, jy));
      }
    }
    std::sort(near_boxes.begin(), near_boxes.end());

    const LocalExpansionT<Real>& le = batch.locals[b];
    for (int ti : grid.members[b]) {
      const auto& tp = particles[static_cast<std::size_t>(ti)];
      const std::complex<Real> y(static_cast<Real>(tp.position.real()),
                                 static_cast<Real>(tp.position.imag()));
      std::complex<Real> acc{};
      for (int nb : near_boxes) {
        for (int si : grid.members[static_cast<std::size_t>(nb)]) {
          const auto& sp = particles[static_cast<std::size_t>(si)];
          const std::complex<Real> z(static_cast<Real>(sp.position.real()),
                                     static_cast<Real>(sp.position.imag()));
          const std::complex<Real> d = y - z;
          if (d == std::complex<Real>{}) continue;
          acc += static_cast<Real>(sp.weight) / d;
          ++near_count[b];
        }
      }
      if (!le.coeffs.empty()) acc += l2p<Real>(le, y);
      field[static_cast<std::size_t>(ti)] = acc;
    }
  });
  const auto t4 = clock::now();
  for (std::size_t b = 0; b < n_boxes; ++b) near_interactions += near_count[b];

  FmmResult<Real> res;
  res.field = std::move(field);
  res.setup_seconds = std::chrono::duration<double>(t1 - t0).count();
  res.m2l_translate_seconds = batch.translate_seconds;
  res.m2l_reduce_seconds = batch.reduce_seconds;

  KernelCounters c = batch.counters;
  c.arithmetic_ops += p2m_ops(config.p, p2m_sources);
  c.arithmetic_ops += near_interactions * kOpsPerP2PInteraction;
  c.arithmetic_ops += static_cast<std::uint64_t>(particles.size()) * l2p_ops(config.p);
  c.bytes_read += p2m_sources * 3 * sizeof(Real);          // position + weight per source
  c.bytes_read += near_interactions * 3 * sizeof(Real);    // near-field source loads
  c.bytes_read += static_cast<std::uint64_t>(particles.size()) *
                  (2 * static_cast<std::uint64_t>(config.p)) * sizeof(Real);  // LE per L2P
  c.bytes_written += static_cast<std::uint64_t>(particles.size()) * 2 * sizeof(Real);
  c.elapsed_seconds = std::chrono::duration<double>(t2 - t1).count() +
                      std::chrono::duration<double>(t3 - t2).count() +
                      std::chrono::duration<double>(t4 - t3).count();
  res.counters = c;
  return res;
}

}  // namespace fastsum::fmm
