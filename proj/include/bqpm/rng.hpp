#pragma once

#include <cstdint>
#include <random>

namespace bqpm {

// Derives an independent stream seed from a master seed and a stream index.
// Used so that e.g. each measurement setting in a simulated run consumes its
// own substream: inserting or reordering settings never perturbs the draws
// of the others.  splitmix64 finalisation keeps nearby (seed, index) pairs
// statistically uncorrelated.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

// Deterministic random source.  Everything the toolkit samples goes through
// this class; in particular Poisson deviates are generated by our own
// inversion / PTRS transformation rather than std::poisson_distribution,
// whose output is implementation-defined and would break cross-platform
// reproducibility of seeded runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double on the open interval (0, 1), 53-bit resolution.
  double uniform();

  // Poisson deviate with mean mu >= 0.  Exact inversion for small mu,
  // Hoermann's PTRS transformed rejection for mu >= 10.
  std::int64_t poisson(double mu);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bqpm
