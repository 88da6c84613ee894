#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <set>

#include "mcddpm/error.hpp"
#include "mcddpm/kernels.hpp"
#include "mcddpm/numerics.hpp"
#include "mcddpm/rng.hpp"
#include "oracles.hpp"

using namespace mcddpm;

TEST_SUITE("numerics") {
  TEST_CASE("philox known-answer vectors") {
    // Random123 reference outputs for Philox4x32-10.
    auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(a == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("rng streams are deterministic, resumable and independent") {
    RngStream a(5, 1), b(5, 1), other(5, 2);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    a.normal();
    RngStream resumed(a.state());
    CHECK(resumed.normal() == a.normal());
    CHECK(resumed.normal() == a.normal());
    CHECK(RngStream(5, 1).next_u64() != other.next_u64());
    CHECK(RngStream(5, 1).next_u64() != RngStream(6, 1).next_u64());
  }

  TEST_CASE("uniform, below and normal behave") {
    RngStream rng(11, 0);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK_UNARY(u > 0.0);
      CHECK_UNARY(u < 1.0);
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      const auto v = rng.below(7);
      CHECK(v < 7u);
      seen.insert(v);
    }
    CHECK(seen.size() == 7u);
  }

  TEST_CASE("dft2 matches the direct unitary transform") {
    for (auto [h, w] : {std::pair{8, 8}, std::pair{4, 6}, std::pair{5, 3}, std::pair{16, 8}}) {
      const ComplexGrid x = oracle::random_grid(3, h, w);
      CHECK(max_abs_diff(dft2(x), oracle::naive_dft2(x, -1)) < 1e-12);
      CHECK(max_abs_diff(idft2(x), oracle::naive_dft2(x, +1)) < 1e-12);
    }
  }

  TEST_CASE("dft2 is unitary and inverted by idft2") {
    const ComplexGrid x = oracle::random_grid(4, 32, 32);
    const ComplexGrid y = dft2(x);
    CHECK(std::abs(y.norm() - x.norm()) < 1e-12 * x.norm());
    CHECK(max_abs_diff(idft2(y), x) < 1e-13);
  }

  TEST_CASE("dft2 of a delta is flat and of a constant is a DC spike") {
    ComplexGrid delta(8, 8);
    delta(0, 0) = 1.0;
    const ComplexGrid flat = dft2(delta);
    for (const auto& v : flat.data()) CHECK(std::abs(v - cplx(1.0 / 8.0)) < 1e-15);
    ComplexGrid ones(8, 8);
    for (auto& v : ones.data()) v = 1.0;
    const ComplexGrid spec = dft2(ones);
    CHECK(std::abs(spec(0, 0) - cplx(8.0)) < 1e-13);
    double off = 0.0;
    for (std::size_t i = 1; i < spec.size(); ++i) off = std::max(off, std::abs(spec[i]));
    CHECK(off < 1e-13);
  }

  TEST_CASE("grid arithmetic and shape checks") {
    ComplexGrid a = oracle::random_grid(1, 4, 4), b = oracle::random_grid(2, 4, 4);
    const ComplexGrid s = a + b;
    CHECK(max_abs_diff(s - b, a) < 1e-15);
    CHECK(max_abs_diff(cplx(2.0) * a, a + a) == 0.0);
    CHECK_THROWS_AS(a + ComplexGrid(4, 5), Error);
    ComplexGrid bad = a;
    bad(1, 1) = {std::nan(""), 0.0};
    CHECK_FALSE(bad.all_finite());
    CHECK(a.all_finite());
  }

  TEST_CASE("parallel conv kernels agree with the reference and ignore thread count") {
    RngStream rng(21, 0);
    const kernels::ConvShape s{5, 7, 9, 11, 3};
    auto fill = [&](std::size_t n) {
      std::vector<double> v(n);
      for (auto& x : v) x = rng.normal();
      return v;
    };
    const auto in = fill(s.input_size()), w = fill(s.weight_size()), b = fill(7), g = fill(s.output_size());

    std::vector<double> ref(s.output_size()), par(s.output_size());
    kernels::reference::conv2d_forward(s, in, w, b, ref);
    kernels::parallel::conv2d_forward(s, in, w, b, par);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(ref[i] - par[i]) < 1e-12);

    std::vector<double> gi_ref(s.input_size()), gi_par(s.input_size());
    kernels::reference::conv2d_backward_input(s, g, w, gi_ref);
    kernels::parallel::conv2d_backward_input(s, g, w, gi_par);
    for (std::size_t i = 0; i < gi_ref.size(); ++i) CHECK(std::abs(gi_ref[i] - gi_par[i]) < 1e-12);

    std::vector<double> gw_ref(s.weight_size()), gw_par(s.weight_size()), gb_ref(7), gb_par(7);
    kernels::reference::conv2d_backward_params(s, in, g, gw_ref, gb_ref);
    kernels::parallel::conv2d_backward_params(s, in, g, gw_par, gb_par);
    for (std::size_t i = 0; i < gw_ref.size(); ++i) CHECK(std::abs(gw_ref[i] - gw_par[i]) < 1e-11);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(gb_ref[i] - gb_par[i]) < 1e-11);

    const int saved = omp_get_max_threads();
    std::vector<double> one(s.output_size()), many(s.output_size());
    omp_set_num_threads(1);
    kernels::parallel::conv2d_forward(s, in, w, b, one);
    omp_set_num_threads(4);
    kernels::parallel::conv2d_forward(s, in, w, b, many);
    omp_set_num_threads(saved);
    CHECK(one == many);
  }

  TEST_CASE("conv backward is the adjoint of forward") {
    // <conv(x), g> = <x, conv^T g> with zero bias.
    RngStream rng(22, 0);
    const kernels::ConvShape s{3, 4, 6, 5, 5};
    std::vector<double> x(s.input_size()), w(s.weight_size()), b(4, 0.0), g(s.output_size());
    for (auto* v : {&x, &w, &g})
      for (auto& e : *v) e = rng.normal();
    std::vector<double> y(s.output_size()), gx(s.input_size());
    kernels::reference::conv2d_forward(s, x, w, b, y);
    kernels::reference::conv2d_backward_input(s, g, w, gx);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * g[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * gx[i];
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
  }

  TEST_CASE("reference and parallel dft agree") {
    for (auto [h, w] : {std::pair{16, 16}, std::pair{6, 10}}) {
      ComplexGrid a = oracle::random_grid(8, h, w), b = a;
      kernels::reference::dft2(a.data(), h, w, -1);
      kernels::parallel::dft2(b.data(), h, w, -1);
      CHECK(max_abs_diff(a, b) < 1e-11);
    }
  }
}
