// Draw a lattice, measure the hole left by a ball of volume V, then run the
// Hecke-lift covering construction on the same lattice size.

#include <cstdio>

#include "coverlab/covering.hpp"

using namespace coverlab;

int main() {
  Rng rng(2024);
  const std::size_t n = 2;
  const auto l = lat::haar_sample(n, 10007, 1, rng);
  const auto ball = geom::ConvexBody::ball(n);

  for (double v : {0.5, 1.0, 2.0, 4.0}) {
    const auto rep = cover::coverage_fraction(ball.with_volume(v), l, 100000, rng);
    std::printf("V=%-4g uncovered=%.4f  [%.4f, %.4f]  e^{-V/2}=%.4f\n", v, rep.uncovered_fraction, rep.ci.lo,
                rep.ci.hi, std::exp(-v / 2));
  }

  const auto c = cover::covering_density(ball, l, 1e-3, rng);
  std::printf("Theta in [%.5f, %.5f]\n", c.theta_lower, c.theta_upper);

  const double M = 16 * 64;  // V = 64 for p = 2
  const auto t = cover::theorem_main_trial(n, ball, M, rng);
  std::printf("trial: p=%llu V=%g eps_hat=%g grid=%d full=%d dilation=%.4f\n",
              static_cast<unsigned long long>(t.p), t.V, t.eps_hat, int(t.grid_covered), int(t.full_cover_ok),
              t.dilation);
  return t.success() ? 0 : 1;
}
