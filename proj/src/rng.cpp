#include "bqpm/rng.hpp"

#include <cmath>

#include "bqpm/errors.hpp"

namespace bqpm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

double Rng::uniform() {
  // Top 53 bits, shifted into (0,1): never returns an exact 0 or 1, so it is
  // safe inside logs and rejection tests.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::int64_t Rng::poisson(double mu) {
  if (!std::isfinite(mu) || mu < 0.0)
    throw InputError("poisson mean must be finite and non-negative");
  if (mu == 0.0) return 0;

  if (mu < 10.0) {
    // Multiplicative inversion (Knuth).  Cost grows with mu, fine below 10.
    const double limit = std::exp(-mu);
    double prod = 1.0;
    std::int64_t k = -1;
    do {
      ++k;
      prod *= uniform();
    } while (prod > limit);
    return k;
  }

  // PTRS: W. Hoermann, "The transformed rejection method for generating
  // Poisson random variables", Insurance Math. Econom. 12, 39 (1993).
  const double b = 0.931 + 2.53 * std::sqrt(mu);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mu);
  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mu - mu - std::lgamma(k + 1.0))
      return static_cast<std::int64_t>(k);
  }
}

}  // namespace bqpm
