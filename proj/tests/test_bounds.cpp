#include "tpr/bounds.hpp"
#include "tpr/error.hpp"
#include "tpr/functionals.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace tpr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ImageSpaceSpec random_space(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> mdist(1, 60);
  const int m = mdist(rng);
  std::uniform_int_distribution<int> kdist(0, m);
  switch (rng() % 3) {
    case 0: return ImageSpaceSpec::uniform(m);
    case 1: return ImageSpaceSpec::cpf(m, kdist(rng));
    default: {
      std::vector<int> ks{kdist(rng)};
      const int extra = kdist(rng);
      if (extra != ks.front()) ks.push_back(extra);
      return ImageSpaceSpec::bcpf(m, ks);
    }
  }
}

}  // namespace

TEST_CASE("image space validation") {
  CHECK_THROWS_AS(ImageSpaceSpec::uniform(0), Error);
  CHECK_THROWS_AS(ImageSpaceSpec::cpf(4, 5), Error);
  CHECK_THROWS_AS(ImageSpaceSpec::bcpf(4, {}), Error);
  CHECK_THROWS_AS(ImageSpaceSpec::bcpf(4, {1, 1}), Error);
  CHECK_THROWS_AS(ImageSpaceSpec::bcpf(4, {-1, 2}), Error);
  CHECK(ImageSpaceSpec::bcpf(3, {3, 1, 0, 2}).variant() == ImageSpaceSpec::Variant::Uniform);
  CHECK(ImageSpaceSpec::bcpf(5, {4, 1}).targets() == std::vector<int>{1, 4});
  CHECK(std::exp(ImageSpaceSpec::bcpf(5, {1, 4}).log_size()) == doctest::Approx(10.0));
  CHECK(ImageSpaceSpec::cpf(9, 3).describe() == "cpf(m=9,k=3)");
}

TEST_CASE("single-pixel and identical-channel bounds") {
  for (double f : {0.0, 0.3, 0.9, 1.0}) {
    for (std::int64_t M : {1, 4, 17}) {
      const auto r = bounds(ImageSpaceSpec::uniform(1), M, f, f);
      CHECK(r.q_lower == doctest::Approx(std::pow(f, 2.0 * M) / 4.0).epsilon(1e-13));
      CHECK(r.q_upper == doctest::Approx(std::pow(f, static_cast<double>(M)) / 2.0).epsilon(1e-13));
    }
  }
  for (int m : {1, 5, 30}) {
    for (const auto& space : {ImageSpaceSpec::uniform(m), ImageSpaceSpec::cpf(m, m / 2)}) {
      const auto r = bounds(space, 3, 1.0, 1.0);
      CHECK(r.q_lower == r.cl_lower);
      CHECK(r.mga <= 0.0);
      CHECK(r.mbar_adv == kInf);
    }
  }
  const auto warn = bounds(ImageSpaceSpec::uniform(4), 2, 0.9, 0.8);
  CHECK_FALSE(warn.warnings.empty());
  CHECK_THROWS_AS(bounds(ImageSpaceSpec::uniform(4), 0, 0.5, 0.6), Error);
  CHECK_THROWS_AS(bounds(ImageSpaceSpec::uniform(4), 1, 1.5, 0.6), Error);
}

TEST_CASE("uniform closed forms") {
  const int m = 9;
  const double fq = 0.9428090415820634;
  const double fcl = 0.99990;
  for (std::int64_t M : {1, 10, 40}) {
    const auto r = bounds(ImageSpaceSpec::uniform(m), M, fq, fcl);
    const double gq = std::pow(fq, 2.0 * M);
    const double gcl = std::pow(fcl, 2.0 * M);
    CHECK(r.q_lower == doctest::Approx((std::pow(gq + 1.0, m) - 1.0) / std::ldexp(1.0, m + 1)).epsilon(1e-12));
    CHECK(r.cl_lower == doctest::Approx((std::pow(gcl + 1.0, m) - 1.0) / std::ldexp(1.0, m + 1)).epsilon(1e-12));
    const double local = 1.0 - std::pow(1.0 - std::pow(fq, static_cast<double>(M)) / 2.0, m);
    CHECK(r.local_upper == doctest::Approx(local).epsilon(1e-12));
    CHECK(r.q_upper == doctest::Approx(std::min(local, r.pgm_upper)));
    CHECK(r.mga == doctest::Approx(r.cl_lower - r.q_upper));
    CHECK(r.mpa == doctest::Approx(r.cl_lower - r.q_lower));
  }
  const auto cpf = bounds(ImageSpaceSpec::cpf(6, 2), 3, 0.7, 0.9);
  const double g = std::pow(0.7, 6.0);
  CHECK(cpf.q_lower == doctest::Approx(cpf_functional(6, 2, g) / 30.0).epsilon(1e-12));
  CHECK(cpf.q_upper == doctest::Approx(std::min(1.0, cpf_functional(6, 2, std::pow(0.7, 3.0)))).epsilon(1e-12));
  const auto cpf_far = bounds(ImageSpaceSpec::cpf(6, 2), 9, 0.7, 0.9);
  CHECK(cpf_far.q_upper == doctest::Approx(cpf_functional(6, 2, std::pow(0.7, 9.0))).epsilon(1e-12));
  CHECK(cpf_far.q_upper < 1.0);
  CHECK(std::isnan(cpf.local_upper));
}

TEST_CASE("full target set reproduces the uniform space") {
  std::vector<int> all;
  for (int k = 0; k <= 12; ++k) all.push_back(k);
  for (std::int64_t M : {1, 5, 50}) {
    const auto a = bounds(ImageSpaceSpec::bcpf(12, all), M, 0.8, 0.95);
    const auto b = bounds(ImageSpaceSpec::uniform(12), M, 0.8, 0.95);
    CHECK(a.q_lower == b.q_lower);
    CHECK(a.q_upper == b.q_upper);
    CHECK(a.cl_lower == b.cl_lower);
  }
}

TEST_CASE("bounds are non-increasing in M") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 60; ++s) {
    const auto space = random_space(rng);
    const double fq = 0.5 + 0.5 * unit(rng);
    const double fcl = fq + (1.0 - fq) * unit(rng);
    BoundReport prev = bounds(space, 1, fq, fcl);
    for (std::int64_t M = 2; M <= 400; M += 7) {
      const auto r = bounds(space, M, fq, fcl);
      CHECK(r.q_lower <= prev.q_lower + 1e-15);
      CHECK(r.q_upper <= prev.q_upper + 1e-15);
      CHECK(r.cl_lower <= prev.cl_lower + 1e-15);
      prev = r;
    }
  }
}

TEST_CASE("randomized bound ordering") {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    const auto space = random_space(rng);
    const double fq = unit(rng);
    const double fcl = fq + (1.0 - fq) * unit(rng);
    const auto M = static_cast<std::int64_t>(1 + rng() % 100000);
    const auto r = bounds(space, M, fq, fcl);
    INFO(space.describe() << " M=" << M << " fq=" << fq << " fcl=" << fcl);
    CHECK(r.q_lower <= r.q_upper + 1e-12);
    CHECK(r.mpa >= r.mga - 1e-12);
    for (double p : {r.q_lower, r.q_upper, r.cl_lower}) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
    CHECK(r.warnings.empty());
  }
}

TEST_CASE("local measurement bound never exceeds the PGM bound on uniform spaces") {
  for (int m = 1; m <= 64; m += 3) {
    for (double f : {0.1, 0.5, 0.9, 0.99, 0.9999}) {
      for (std::int64_t M : {1, 3, 30, 3000}) {
        const auto r = bounds(ImageSpaceSpec::uniform(m), M, f, 1.0);
        CHECK(r.local_upper <= r.pgm_upper + 1e-15);
      }
    }
  }
}

TEST_CASE("pair sums grow with the image space") {
  // Under a common prior the lower bound is a sum of non-negative pair
  // terms, so enlarging the space can only raise it.
  for (int m = 2; m <= 12; ++m) {
    for (double lf : {-6.0, -1.0, -0.05}) {
      const double uni = log_space::uniform(m, lf);
      for (int k = 0; k <= m; ++k) {
        for (int l = 0; l <= m; ++l) {
          if (l == k) continue;
          const double cpf = log_space::cpf(m, k, lf);
          const double pair = log_space::bcpf(m, {std::min(k, l), std::max(k, l)}, lf);
          CHECK(cpf <= pair + 1e-12);
          CHECK(pair <= uni + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("per-space prior normalization breaks the space ordering") {
  // With priors normalized within each space a small two-count space can
  // sit above the full space: m=4, F^{2M}=0.01, counts {0,1}.
  const auto sub = bounds(ImageSpaceSpec::bcpf(4, {0, 1}), 1, 0.1, 1.0);
  const auto full = bounds(ImageSpaceSpec::uniform(4), 1, 0.1, 1.0);
  CHECK(sub.q_lower == doctest::Approx(0.0812 / 50.0).epsilon(1e-12));
  CHECK(full.q_lower == doctest::Approx((std::pow(1.01, 4) - 1.0) / 32.0).epsilon(1e-12));
  CHECK(sub.q_lower > full.q_lower);
}

TEST_CASE("minimum relative probe number") {
  CHECK(min_rel_probe_uniform(0.9, 0.9) == kInf);
  CHECK(min_rel_probe_uniform(1.0, 1.0) == kInf);
  CHECK(min_rel_probe_additive(0.3, 0.3) == kInf);
  CHECK_THROWS_AS(min_rel_probe_uniform(0.0, 0.5), Error);
  CHECK_THROWS_AS(min_rel_probe_additive(-0.1, 0.5), Error);

  const auto pair = EnvironmentPair::additive(0.02, 0.01);
  const double fq = fidelity_choi_inf(pair).value;
  const double fcl = fidelity_classical(pair);
  const double generic = min_rel_probe_uniform(fq, fcl);
  const double closed = min_rel_probe_additive(0.01, 0.02);
  CHECK(generic == doctest::Approx(12.1177).epsilon(1e-5));
  CHECK(std::abs(generic - closed) <= 1e-10 * closed);

  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> lognu(std::log(1e-3), 0.0);
  for (int i = 0; i < 100; ++i) {
    const double nt = std::exp(lognu(rng));
    const double nb = std::exp(lognu(rng));
    const auto p = EnvironmentPair::additive(nb, nt);
    const double a = min_rel_probe_uniform(fidelity_choi_inf(p).value, fidelity_classical(p));
    const double b = min_rel_probe_additive(nt, nb);
    INFO("nu_T=" << nt << " nu_B=" << nb);
    if (std::isinf(b)) {
      CHECK(std::isinf(a));
    } else {
      CHECK(std::abs(a - b) <= 1e-10 * b);
    }
  }
}

TEST_CASE("relaxed margin brackets the guaranteed advantage") {
  const auto pair = EnvironmentPair::additive(0.02, 0.01);
  const double fq = fidelity_choi_inf(pair).value;
  const double fcl = fidelity_classical(pair);
  const double mbar = min_rel_probe_uniform(fq, fcl);
  for (int m : {4, 9, 50}) {
    const double cross = mbar * m;
    const auto below = static_cast<std::int64_t>(std::floor(cross));
    const auto above = static_cast<std::int64_t>(std::ceil(cross));
    CHECK(relaxed_margin(m, below, fq, fcl) < 0.0);
    CHECK(relaxed_margin(m, above, fq, fcl) > 0.0);
    for (std::int64_t M = 1; M <= 3 * above; ++M) {
      const auto r = bounds(ImageSpaceSpec::uniform(m), M, fq, fcl);
      CHECK(relaxed_margin(m, M, fq, fcl) <= r.mga + 1e-15);
      if (M >= above) CHECK(r.mga >= 0.0);
    }
    CHECK(bounds(ImageSpaceSpec::uniform(m), 1, fq, fcl).mga < 0.0);
    const auto first = first_guaranteed_advantage(ImageSpaceSpec::uniform(m), fq, fcl, 3 * above);
    REQUIRE(first.has_value());
    CHECK(*first <= above);
  }
  CHECK(first_guaranteed_advantage(ImageSpaceSpec::uniform(9), fq, fcl, 200) == 39);
}

TEST_CASE("probe fidelity regimes") {
  const auto pair = EnvironmentPair::additive(0.02, 0.01);
  const double cl = probe_fidelity(pair, {1, ProbeSpec::Energy::Classical, 0.5});
  const double fin = probe_fidelity(pair, {1, ProbeSpec::Energy::Finite, 10.0});
  const double inf = probe_fidelity(pair, {1, ProbeSpec::Energy::Asymptotic, 0.5});
  CHECK(cl >= fin);
  CHECK(fin >= inf);
  CHECK(probe_fidelity(pair, {1, ProbeSpec::Energy::Finite, 0.5}) == doctest::Approx(cl).epsilon(1e-12));
}

TEST_CASE("pixel error bounds") {
  CHECK(pixel_error_bounds(1.0, 7).lower == 0.5);
  CHECK(pixel_error_bounds(1.0, 7).upper == 0.5);
  CHECK(pixel_error_bounds(0.0, 1).lower == 0.0);
  CHECK(pixel_error_bounds(0.0, 1).upper == 0.0);
  PixelErrorBounds prev{0.5, 0.5};
  for (std::int64_t M = 1; M <= 200; ++M) {
    const auto b = pixel_error_bounds(0.9428090, M);
    CHECK(b.lower <= b.upper);
    CHECK(b.lower >= 0.0);
    CHECK(b.upper <= 0.5);
    CHECK(b.lower < prev.lower);
    CHECK(b.upper < prev.upper);
    prev = b;
  }
  const auto b50 = pixel_error_bounds(0.9428090, 50);
  const double x = std::pow(0.9428090, 50.0);
  CHECK(b50.upper == doctest::Approx(x / 2.0).epsilon(1e-13));
  CHECK(b50.lower == doctest::Approx((1.0 - std::sqrt(1.0 - x * x)) / 2.0).epsilon(1e-10));
  CHECK_THROWS_AS(pixel_error_bounds(-0.1, 2), Error);
  CHECK_THROWS_AS(pixel_error_bounds(0.5, 0), Error);
}
