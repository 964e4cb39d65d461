#include "fastsum/dataset.hpp"

#include <stdexcept>
#include <string>

namespace fastsum {

namespace {

void check_domain(const Box& domain, int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("generate_dataset: dimension must be 1..3");
  }
  if (domain.lo.size() != static_cast<std::size_t>(dimension) ||
      domain.hi.size() != static_cast<std::size_t>(dimension)) {
    throw std::invalid_argument("generate_dataset: domain dimension mismatch");
  }
  for (int j = 0; j < dimension; ++j) {
    if (!(domain.hi[static_cast<std::size_t>(j)] > domain.lo[static_cast<std::size_t>(j)])) {
      throw std::invalid_argument("generate_dataset: degenerate domain in axis " +
                                  std::to_string(j));
    }
  }
}

double draw_weight(SplitMix64& rng, WeightMode mode) {
  switch (mode) {
    case WeightMode::unit:
      return 1.0;
    case WeightMode::uniform01:
      return rng.next_unit();
    case WeightMode::signed_unit:
      return (rng.next() & 1ULL) ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace

std::vector<GaussianSource> generate_sources(const DatasetSpec& spec, const Box& domain) {
  check_domain(domain, spec.dimension);
  SplitMix64 rng(spec.seed);
  std::vector<GaussianSource> out(spec.count);
  for (auto& s : out) {
    for (int j = 0; j < spec.dimension; ++j) {
      const auto k = static_cast<std::size_t>(j);
      s.position[k] = domain.lo[k] + rng.next_unit() * (domain.hi[k] - domain.lo[k]);
    }
    s.weight = draw_weight(rng, spec.weight_mode);
  }
  return out;
}

std::vector<Particle> generate_particles(const DatasetSpec& spec, const Box& domain) {
  if (spec.dimension != 2) {
    throw std::invalid_argument("generate_particles: dimension must be 2");
  }
  check_domain(domain, 2);
  SplitMix64 rng(spec.seed);
  std::vector<Particle> out(spec.count);
  for (auto& p : out) {
    const double x = domain.lo[0] + rng.next_unit() * (domain.hi[0] - domain.lo[0]);
    const double y = domain.lo[1] + rng.next_unit() * (domain.hi[1] - domain.lo[1]);
    p.position = {x, y};
    p.weight = draw_weight(rng, spec.weight_mode);
  }
  return out;
}

}  // namespace fastsum
