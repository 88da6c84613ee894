#include <doctest.h>
#include <omp.h>

#include <cmath>

#include "mcddpm/diffusion.hpp"
#include "mcddpm/error.hpp"
#include "oracles.hpp"

using namespace mcddpm;

namespace {

class ZeroPredictor : public NoisePredictor {
 public:
  PartialKSpace predict(const DiffusionState& s, const PartialKSpace&, int) const override {
    return PartialKSpace::zeros(s.y.height(), s.y.mask(), Side::NonSampled);
  }
  bool accepts(int, int) const override { return true; }
};

// Exact E[eps | y_t] when every non-sampled component of y0 is independent N(0, s0^2).
class GaussianOracle : public NoisePredictor {
 public:
  GaussianOracle(const DiffusionSchedule& s, double s0) : s_(s), s0_(s0) {}
  PartialKSpace predict(const DiffusionState& st, const PartialKSpace&, int model_t) const override {
    const double a = s_.bar_alpha(model_t), b = s_.bar_beta(model_t);
    return scaled(b / (a * a * s0_ * s0_ + b * b), st.y);
  }
  bool accepts(int, int) const override { return true; }

 private:
  const DiffusionSchedule& s_;
  double s0_;
};

Mask test_mask(int width) { return make_equispaced_mask(width, 4.0, 0.125); }

}  // namespace

TEST_SUITE("diffusion") {
  TEST_CASE("q_sample at t = 0 returns y0 and rejects sampled partials") {
    const DiffusionSchedule s = build_cosine_halved(16);
    RngStream rng(1, 0);
    const Mask m = test_mask(8);
    const PartialKSpace y0(oracle::random_grid(1, 8, 8), m, Side::NonSampled);
    const PartialKSpace eps = masked_noise(m, 8, rng);
    CHECK(q_sample(y0, 0, s, eps).y.grid() == y0.grid());
    const PartialKSpace wrong(oracle::random_grid(1, 8, 8), m, Side::Sampled);
    CHECK_THROWS_AS(q_sample(wrong, 3, s, eps), Error);
    CHECK_THROWS_AS(q_sample(y0, 17, s, eps), Error);
  }

  TEST_CASE("chained forward steps match the closed-form marginal") {
    const int steps = 6, chains = 40000;
    const DiffusionSchedule s = build_cosine_halved(steps);
    const Mask m = test_mask(4);
    const PartialKSpace y0(oracle::random_grid(2, 2, 4, 3.0), m, Side::NonSampled);
    const std::size_t n = y0.grid().size();
    std::vector<double> sum(2 * n, 0.0), sq(2 * n, 0.0);
    RngStream rng(9, 0);
    for (int c = 0; c < chains; ++c) {
      DiffusionState st{y0, 0};
      for (int t = 1; t <= steps; ++t) st = chain_step(st, s, masked_noise(m, 2, rng));
      for (std::size_t i = 0; i < n; ++i) {
        const cplx v = st.y.grid()[i];
        sum[2 * i] += v.real();
        sum[2 * i + 1] += v.imag();
        sq[2 * i] += v.real() * v.real();
        sq[2 * i + 1] += v.imag() * v.imag();
      }
    }
    const double var = s.bar_beta(steps) * s.bar_beta(steps);
    for (std::size_t i = 0; i < n; ++i) {
      const int col = int(i % 4);
      for (int part = 0; part < 2; ++part) {
        const double y0v = part ? y0.grid()[i].imag() : y0.grid()[i].real();
        const double mean = sum[2 * i + part] / chains;
        if (m.sampled_raw(col)) {
          CHECK(mean == 0.0);
          continue;
        }
        const double emp_var = sq[2 * i + part] / chains - mean * mean;
        CHECK(std::abs(mean - s.bar_alpha(steps) * y0v) < 4.5 * std::sqrt(var / chains));
        CHECK(std::abs(emp_var / var - 1.0) < 0.03);
      }
    }
  }

  TEST_CASE("posterior matches brute-force Bayes on a few instances") {
    RngStream rng(4, 0);
    const Mask m(std::vector<std::uint8_t>{1, 0});  // raw column 1 is non-sampled
    for (int trial = 0; trial < 5; ++trial) {
      const int steps = 2 + int(rng.below(10));
      std::vector<double> alpha(steps), beta(steps);
      for (int i = 0; i < steps; ++i) {
        alpha[i] = 0.5 + 0.5 * rng.uniform();
        beta[i] = 0.05 + 0.6 * rng.uniform();
      }
      const DiffusionSchedule s(alpha, beta, SigmaRule::Posterior);
      const auto ref = oracle::schedule(alpha, beta);
      const int t = 2 + int(rng.below(std::uint64_t(steps - 1)));
      const double y0v = 2.0 * rng.normal(), ytv = 2.0 * rng.normal();
      ComplexGrid g0(1, 2), gt(1, 2);
      const int col = Mask::centered_to_raw(1, 2);
      g0(0, col) = y0v;
      gt(0, col) = ytv;
      const Posterior p = posterior({PartialKSpace(gt, m, Side::NonSampled), t}, PartialKSpace(g0, m, Side::NonSampled), s);
      const auto want = oracle::bayes_posterior(alpha[t - 1], beta[t - 1], ref.bar_alpha[t - 1], ref.bar_beta[t - 1], ytv, y0v);
      CHECK(std::abs(p.mu_tilde.grid()(0, col).real() - want.mean) < 1e-4);
      CHECK(std::abs(p.beta_tilde - want.std) < 1e-4);
    }
  }

  TEST_CASE("noise parameterisation recovers the posterior mean") {
    RngStream rng(5, 0);
    const DiffusionSchedule s = build_cosine_halved(50);
    const Mask m = test_mask(8);
    for (int trial = 0; trial < 20; ++trial) {
      const int t = 1 + int(rng.below(50));
      const PartialKSpace y0(oracle::random_grid(trial, 4, 8), m, Side::NonSampled);
      const PartialKSpace eps = masked_noise(m, 4, rng);
      const DiffusionState yt = q_sample(y0, t, s, eps);
      CHECK(max_abs_diff(mu_from_eps(yt, eps, s).grid(), posterior(yt, y0, s).mu_tilde.grid()) < 1e-10);
    }
  }

  TEST_CASE("the final reverse step returns y0 and refuses noise") {
    const DiffusionSchedule s = build_cosine_halved(20);
    RngStream rng(6, 0);
    const Mask m = test_mask(8);
    const PartialKSpace y0(oracle::random_grid(3, 4, 8), m, Side::NonSampled);
    const PartialKSpace eps = masked_noise(m, 4, rng);
    const DiffusionState y1 = q_sample(y0, 1, s, eps);
    const PartialKSpace zero = PartialKSpace::zeros(4, m, Side::NonSampled);
    const DiffusionState out = reverse_step(y1, eps, s, zero);
    CHECK(out.t == 0);
    CHECK(max_abs_diff(out.y.grid(), y0.grid()) < 1e-12);
    CHECK(out.y.grid() == mu_from_eps(y1, eps, s).grid());
    CHECK_THROWS_AS(reverse_step(y1, eps, s, eps), Error);
  }

  TEST_CASE("losses") {
    const Mask m = test_mask(8);
    RngStream rng(7, 0);
    const PartialKSpace a = masked_noise(m, 4, rng);
    const PartialKSpace zero = PartialKSpace::zeros(4, m, Side::NonSampled);
    CHECK(simple_loss(a, a) == 0.0);
    const double n2 = a.grid().norm() * a.grid().norm();
    CHECK(std::abs(simple_loss(a, zero) - n2) < 1e-12 * n2);
    const DiffusionSchedule s = build_cosine_halved(10);
    CHECK(std::abs(vlb_loss(a, zero, 4, s) - vlb_weight(4, s) * simple_loss(a, zero)) < 1e-12 * n2);
  }

  TEST_CASE("sampler outputs are data consistent, deterministic and thread-count independent") {
    const DiffusionSchedule s = build_cosine_halved(16);
    RngStream rng(8, 0);
    const Mask m = make_random_mask(16, 4.0, 0.08, rng);
    const PartialKSpace y_m = split(oracle::random_grid(4, 16, 16), m).first;
    ZeroPredictor model;
    const auto a = sample(model, y_m, s, {6, 3, 1});
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto b = sample(model, y_m, s, {6, 3, 1});
    omp_set_num_threads(saved);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(data_consistency_error(a[i], y_m) <= 1e-10);
    }
    CHECK_FALSE(a[0] == a[1]);
    // Chain i only depends on its own stream.
    const auto c = sample(model, y_m, s, {2, 3, 5});
    CHECK(c[0] == a[4]);
  }

  TEST_CASE("a fully sampled mask short-circuits to the inverse transform") {
    const DiffusionSchedule s = build_cosine_halved(8);
    const Mask full = make_equispaced_mask(8, 1.0, 0.0);
    const ComplexGrid x = oracle::random_grid(6, 8, 8);
    const PartialKSpace y_m = split(x, full).first;
    ZeroPredictor model;
    const auto out = sample(model, y_m, s, {2, 1, 1});
    CHECK(max_abs_diff(out[0], x) < 1e-13);
    CHECK(out[0] == out[1]);
  }

  TEST_CASE("respacing with K = T gives byte-identical samples") {
    const DiffusionSchedule s = build_cosine_halved(24);
    const Mask m = test_mask(8);
    const PartialKSpace y_m = split(oracle::random_grid(7, 8, 8), m).first;
    GaussianOracle model(s, 1.0);
    const auto a = sample(model, y_m, s, {3, 4, 1});
    const auto b = sample(model, y_m, respace(s, 24), {3, 4, 1});
    for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("ancestral sampling with the exact noise predictor recovers a Gaussian prior") {
    // y0 ~ N(0, s0^2) per real component; the sampler's output spread should match it.
    const double s0 = 2.0;
    const DiffusionSchedule s = build_cosine_halved(200);
    const Mask m = test_mask(4);
    const PartialKSpace y_m = PartialKSpace::zeros(2, m, Side::Sampled);
    GaussianOracle model(s, s0);
    const int n = 4000;
    const auto out = sample(model, y_m, s, {n, 12, 1});
    double sq = 0.0, sum = 0.0;
    int count = 0;
    for (const auto& x : out) {
      const ComplexGrid k = dft2(x);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c) {
          if (m.sampled_raw(c)) continue;
          for (double v : {k(r, c).real(), k(r, c).imag()}) {
            sum += v;
            sq += v * v;
            ++count;
          }
        }
    }
    const double mean = sum / count;
    const double var = sq / count - mean * mean;
    CHECK(std::abs(mean) < 4.5 * s0 / std::sqrt(double(count)));
    CHECK(std::abs(var / (s0 * s0) - 1.0) < 0.05);
  }

  TEST_CASE("averaging more samples shrinks the spread of the estimate") {
    // With exact posterior draws the mean of k samples has spread s0 / sqrt(k).
    const double s0 = 1.5;
    const DiffusionSchedule s = build_cosine_halved(50);
    const Mask m = test_mask(8);
    const PartialKSpace y_m = split(oracle::random_grid(3, 4, 8), m).first;
    GaussianOracle model(s, s0);
    const int groups = 96;
    std::vector<double> spread;
    for (int k : {1, 4, 16}) {
      const auto out = sample(model, y_m, s, {groups * k, std::uint64_t(40 + k), 1});
      double sq = 0.0;
      int count = 0;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 8; ++c) {
          if (m.sampled_raw(c)) continue;
          std::vector<cplx> means(groups);
          for (int g = 0; g < groups; ++g) {
            for (int i = 0; i < k; ++i) means[g] += dft2(out[g * k + i])(r, c);
            means[g] /= double(k);
          }
          for (const cplx& v : means) sq += std::norm(v);
          count += 2 * groups;
        }
      spread.push_back(std::sqrt(sq / count));
      CHECK(std::abs(spread.back() * std::sqrt(double(k)) / s0 - 1.0) < 0.1);
    }
    CHECK(spread[0] > spread[1]);
    CHECK(spread[1] > spread[2]);
  }

  TEST_CASE("sampler rejects unusable predictors and bad inputs") {
    class Fussy : public ZeroPredictor {
      bool accepts(int h, int) const override { return h == 99; }
    };
    const DiffusionSchedule s = build_cosine_halved(4);
    const Mask m = test_mask(8);
    const PartialKSpace y_m = PartialKSpace::zeros(8, m, Side::Sampled);
    CHECK_THROWS_AS(sample(Fussy{}, y_m, s, {1, 0, 1}), Error);
    CHECK_THROWS_AS(sample(ZeroPredictor{}, y_m, s, {0, 0, 1}), Error);
    CHECK_THROWS_AS(sample(ZeroPredictor{}, PartialKSpace::zeros(8, m, Side::NonSampled), s, {1, 0, 1}), Error);
  }
}
