#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace fastsum {

//! Source particle of the 2D Cauchy-kernel pipeline: position as a complex
//! coordinate, real weight.
struct Particle {
  std::complex<double> position;
  double weight = 1.0;
};

//! Source of the Gauss transform in d <= 3 dimensions. Only the first d
//! entries of position are used.
struct GaussianSource {
  std::array<double, 3> position{};
  double weight = 1.0;
};

//! Axis-aligned box; dimension = lo.size().
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

enum class WeightMode { unit, uniform01, signed_unit };

struct DatasetSpec {
  std::uint64_t count = 0;
  int dimension = 2;
  std::uint64_t seed = 0;
  WeightMode weight_mode = WeightMode::unit;
};

//! splitmix64: the fixed, platform-independent generator behind all dataset
//! generation. State advances by the golden-gamma increment; output is the
//! usual xor-shift-multiply finalizer (Steele, Lea & Flood 2014).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  //! Uniform double in [0, 1), 53 significant bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

//! `count` points uniformly distributed in `domain`, weights per weight_mode.
//! Identical spec + domain give a bit-identical dataset on every platform and
//! from any thread. Draw order per point: the d coordinates, then the weight
//! (when the mode needs one).
std::vector<GaussianSource> generate_sources(const DatasetSpec& spec, const Box& domain);

//! Same generator specialized to 2D complex coordinates (dimension must be 2).
std::vector<Particle> generate_particles(const DatasetSpec& spec, const Box& domain);

}  // namespace fastsum
