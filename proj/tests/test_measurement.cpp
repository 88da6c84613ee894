#include <doctest.h>

#include <cmath>

#include "mcddpm/error.hpp"
#include "mcddpm/measurement.hpp"
#include "oracles.hpp"

using namespace mcddpm;

namespace {

std::vector<int> sampled_columns(const Mask& m) {
  std::vector<int> out;
  for (int c = 0; c < m.width(); ++c)
    if (m.sampled(c)) out.push_back(c);
  return out;
}

}  // namespace

TEST_SUITE("measurement") {
  TEST_CASE("budget and centre counts") {
    CHECK(mask_budget(32, 4.0) == 8);
    CHECK(mask_budget(32, 8.0) == 4);
    CHECK(mask_budget(320, 4.0) == 80);
    CHECK(mask_center_count(32, 0.08) == 3);
    CHECK(mask_center_count(320, 0.08) == 26);
    CHECK(mask_center_count(32, 0.0) == 0);
  }

  TEST_CASE("random mask: budget, centre block, determinism") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RngStream a(seed, 0), b(seed, 0);
      const Mask m = make_random_mask(32, 4.0, 0.08, a);
      CHECK(m.sampled_count() == 8);
      CHECK(m.sampled(15));
      CHECK(m.sampled(16));
      CHECK(m.sampled(17));
      CHECK(m == make_random_mask(32, 4.0, 0.08, b));
    }
    RngStream r1(1, 0), r2(2, 0);
    CHECK_FALSE(make_random_mask(64, 4.0, 0.04, r1) == make_random_mask(64, 4.0, 0.04, r2));
  }

  TEST_CASE("random mask draws non-centre columns uniformly") {
    std::vector<int> hits(32, 0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      RngStream rng(i, 3);
      const Mask m = make_random_mask(32, 4.0, 0.08, rng);
      for (int c = 0; c < 32; ++c) hits[c] += m.sampled(c);
    }
    // 5 of the 29 free columns per draw.
    const double p = 5.0 / 29.0, se = std::sqrt(p * (1 - p) / n);
    for (int c = 0; c < 32; ++c) {
      if (c >= 15 && c <= 17) {
        CHECK(hits[c] == n);
      } else {
        CHECK(std::abs(double(hits[c]) / n - p) < 5 * se);
      }
    }
  }

  TEST_CASE("equispaced mask matches an explicit enumeration") {
    // Centre block, then every accel-th column from 0, then shifted passes if still short.
    auto enumerate = [](int width, int accel, double cf) {
      const int budget = int(std::lround(double(width) / accel));
      const int centre = int(std::lround(cf * width));
      std::vector<int> cols(width, 0);
      int count = 0;
      for (int i = 0; i < centre; ++i) cols[(width - centre + 1) / 2 + i] = 1, ++count;
      for (int off = 0; off < accel; ++off)
        for (int c = off; c < width; c += accel)
          if (count < budget && !cols[c]) cols[c] = 1, ++count;
      return cols;
    };
    for (auto [w, a, cf] : {std::tuple{32, 4, 0.08}, std::tuple{32, 8, 0.04}, std::tuple{40, 4, 0.08},
                            std::tuple{17, 3, 0.1}, std::tuple{64, 8, 0.125}}) {
      const Mask m = make_equispaced_mask(w, a, cf);
      const std::vector<int> expected = enumerate(w, a, cf);
      CHECK(m.columns() == std::vector<std::uint8_t>(expected.begin(), expected.end()));
      CHECK(m.sampled_count() == mask_budget(w, a));
    }
    CHECK(sampled_columns(make_equispaced_mask(32, 4.0, 0.08)) == std::vector<int>{0, 4, 8, 12, 15, 16, 17, 20});
  }

  TEST_CASE("acceleration 1 samples everything; oversized centre block is rejected") {
    RngStream rng(0, 0);
    CHECK(make_random_mask(32, 1.0, 0.08, rng).fully_sampled());
    CHECK(make_equispaced_mask(32, 1.0, 0.5).fully_sampled());
    CHECK_THROWS_AS(make_random_mask(32, 4.0, 0.5, rng), Error);
    CHECK_THROWS_AS(make_equispaced_mask(32, 8.0, 0.2), Error);
    CHECK_THROWS_AS(make_equispaced_mask(32, 0.5, 0.0), Error);
    CHECK_THROWS_AS(Mask(std::vector<std::uint8_t>{}), Error);
  }

  TEST_CASE("centred and raw column indices") {
    for (int w : {8, 9, 32}) {
      for (int c = 0; c < w; ++c) CHECK(Mask::raw_to_centered(Mask::centered_to_raw(c, w), w) == c);
      CHECK(Mask::raw_to_centered(0, w) == w / 2);
    }
    std::vector<std::uint8_t> cols(8, 0);
    cols[4] = 1;  // DC in the centred view
    const Mask m(cols);
    CHECK(m.sampled_raw(0));
    for (int r = 1; r < 8; ++r) CHECK_FALSE(m.sampled_raw(r));
  }

  TEST_CASE("partials are exactly zero off support and split/merge round-trips") {
    RngStream rng(4, 0);
    const Mask m = make_random_mask(16, 4.0, 0.08, rng);
    const ComplexGrid x = oracle::random_grid(5, 12, 16);
    const auto [y_m, y_c] = split(x, m);
    const ComplexGrid k = dft2(x);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 16; ++c) {
        const bool s = m.sampled_raw(c);
        CHECK((s ? y_c.grid()(r, c) : y_m.grid()(r, c)) == cplx{});
        CHECK((s ? y_m.grid()(r, c) : y_c.grid()(r, c)) == k(r, c));
      }
    CHECK(max_abs_diff(merge_and_invert(y_m, y_c), x) < 1e-13);
    CHECK(data_consistency_error(x, y_m) < 1e-13);
    CHECK(m.complement().sampled_count() == 16 - m.sampled_count());
    CHECK_THROWS_AS(merge_and_invert(y_m, y_m), Error);
  }

  TEST_CASE("masked noise lives on the complement only") {
    RngStream rng(6, 0);
    const Mask m = make_equispaced_mask(16, 4.0, 0.08);
    const PartialKSpace n = masked_noise(m, 8, rng);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 16; ++c) {
        if (m.sampled_raw(c)) {
          CHECK(n.grid()(r, c) == cplx{});
        } else {
          CHECK(n.grid()(r, c) != cplx{});
        }
      }
    CHECK_THROWS_AS(masked_noise(make_equispaced_mask(16, 1.0, 0.0), 8, rng), Error);
  }

  TEST_CASE("axpby stays on the support and rejects mixed partials") {
    RngStream rng(7, 0);
    const Mask m = make_equispaced_mask(8, 2.0, 0.25);
    const PartialKSpace a = masked_noise(m, 4, rng), b = masked_noise(m, 4, rng);
    const PartialKSpace s = axpby(2.0, a, -3.0, b);
    for (std::size_t i = 0; i < s.grid().size(); ++i) CHECK(s.grid()[i] == 2.0 * a.grid()[i] - 3.0 * b.grid()[i]);
    const PartialKSpace sampled_side(oracle::random_grid(1, 4, 8), m, Side::Sampled);
    CHECK_THROWS_AS(axpby(1.0, a, 1.0, sampled_side), Error);
    RngStream r2(8, 0);
    const PartialKSpace other(oracle::random_grid(1, 4, 8), make_random_mask(8, 2.0, 0.0, r2), Side::NonSampled);
    if (!(other.mask() == m)) CHECK_THROWS_AS(axpby(1.0, a, 1.0, other), Error);
  }
}
