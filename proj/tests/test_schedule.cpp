#include <doctest.h>

#include <cmath>

#include "mcddpm/error.hpp"
#include "mcddpm/schedule.hpp"
#include "oracles.hpp"

using namespace mcddpm;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("schedule") {
  TEST_CASE("cosine-halved coefficients match their definition") {
    for (int steps : {1, 8, 128, 1000}) {
      std::vector<double> alpha, beta;
      oracle::cosine_halved(steps, alpha, beta);
      const DiffusionSchedule s = build_cosine_halved(steps);
      REQUIRE(s.steps() == steps);
      for (int t = 1; t <= steps; ++t) {
        CHECK(rel(s.alpha(t), alpha[t - 1]) < 1e-14);
        CHECK(rel(s.beta(t), beta[t - 1]) < 1e-14);
      }
    }
  }

  TEST_CASE("derived coefficients agree with the independent recursion") {
    RngStream rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const int steps = 1 + int(rng.below(60));
      std::vector<double> alpha(steps), beta(steps);
      for (int i = 0; i < steps; ++i) {
        alpha[i] = 0.3 + 0.7 * rng.uniform();
        beta[i] = 0.01 + 1.5 * rng.uniform();
      }
      const auto ref = oracle::schedule(alpha, beta);
      const DiffusionSchedule s(alpha, beta, SigmaRule::Posterior);
      for (int t = 0; t <= steps; ++t) {
        CHECK(rel(s.bar_alpha(t), ref.bar_alpha[t]) < 1e-12);
        if (t > 0) CHECK(rel(s.bar_beta(t), ref.bar_beta[t]) < 1e-12);
      }
      CHECK(s.bar_beta(0) == 0.0);
      CHECK(s.bar_alpha(0) == 1.0);
    }
  }

  TEST_CASE("recursion identity and terminal bounds at T = 1000") {
    const DiffusionSchedule s = build_cosine_halved(1000);
    for (int t = 1; t <= 1000; ++t) {
      const double lhs = s.bar_beta(t) * s.bar_beta(t);
      const double rhs = s.alpha(t) * s.alpha(t) * s.bar_beta(t - 1) * s.bar_beta(t - 1) + s.beta(t) * s.beta(t);
      CHECK(rel(lhs, rhs) < 1e-12);
    }
    CHECK(s.bar_alpha(1000) <= 1e-3);
    CHECK(std::abs(s.bar_beta(1000) - 0.5) <= 0.05);
  }

  TEST_CASE("alpha and beta are not tied to a unit sum of squares") {
    const DiffusionSchedule s = build_cosine_halved(128);
    double worst = 0.0;
    for (int t = 1; t <= 128; ++t)
      worst = std::max(worst, std::abs(s.alpha(t) * s.alpha(t) + s.beta(t) * s.beta(t) - 1.0));
    CHECK(worst > 0.1);
  }

  TEST_CASE("posterior std and sigma rules") {
    const DiffusionSchedule post = build_cosine_halved(64, SigmaRule::Posterior);
    const DiffusionSchedule beta = post.with_sigma_rule(SigmaRule::Beta);
    CHECK(post.tilde_beta(1) == 0.0);
    CHECK(post.sigma(1) == 0.0);
    CHECK(beta.sigma(1) == beta.beta(1));
    for (int t = 2; t <= 64; ++t) {
      CHECK(rel(post.tilde_beta(t), post.beta(t) * post.bar_beta(t - 1) / post.bar_beta(t)) < 1e-15);
      CHECK(post.sigma(t) == post.tilde_beta(t));
      CHECK(post.tilde_beta(t) <= post.beta(t));
    }
    CHECK(parse_sigma_rule("beta") == SigmaRule::Beta);
    CHECK_THROWS_AS(parse_sigma_rule("other"), Error);
  }

  TEST_CASE("T = 1 has one step with a degenerate posterior") {
    const DiffusionSchedule s = build_cosine_halved(1);
    CHECK(s.steps() == 1);
    CHECK(s.tilde_beta(1) == 0.0);
    CHECK(s.bar_beta(1) == s.beta(1));
  }

  TEST_CASE("vlb weight") {
    const DiffusionSchedule s = build_cosine_halved(32);
    CHECK_THROWS_AS(vlb_weight(1, s), Error);
    const int t = 10;
    const double b2 = s.beta(t) * s.beta(t);
    const double expect = b2 * b2 / (2 * s.alpha(t) * s.alpha(t) * s.bar_beta(t) * s.bar_beta(t) * s.sigma(t) * s.sigma(t));
    CHECK(rel(vlb_weight(t, s), expect) < 1e-15);
    CHECK(vlb_weight(1, s.with_sigma_rule(SigmaRule::Beta)) > 0.0);
  }

  TEST_CASE("invalid schedules are rejected") {
    CHECK_THROWS_AS(build_cosine_halved(0), Error);
    CHECK_THROWS_AS(DiffusionSchedule({0.9, 0.0}, {0.1, 0.1}, SigmaRule::Posterior), Error);
    CHECK_THROWS_AS(DiffusionSchedule({0.9}, {-0.1}, SigmaRule::Posterior), Error);
    CHECK_THROWS_AS(DiffusionSchedule({0.9, 0.9}, {0.1}, SigmaRule::Posterior), Error);
  }

  TEST_CASE("respacing with K = T is the identity") {
    for (int steps : {1, 16, 128}) {
      const DiffusionSchedule s = build_cosine_halved(steps);
      CHECK(respace(s, steps) == s);
    }
  }

  TEST_CASE("respacing preserves the marginals at kept indices") {
    const DiffusionSchedule s = build_cosine_halved(1000);
    for (int k : {250, 100, 7, 1}) {
      const DiffusionSchedule r = respace(s, k);
      REQUIRE(r.steps() == k);
      for (int i = 0; i <= k; ++i) {
        const int t = r.model_timestep(i);
        CHECK(t == int(std::lround(double(i) * 1000 / k)));
        CHECK(rel(r.bar_alpha(i), s.bar_alpha(t)) < 1e-12);
        if (i > 0) CHECK(rel(r.bar_beta(i), s.bar_beta(t)) < 1e-12);
      }
      CHECK(rel(r.bar_alpha(k), s.bar_alpha(1000)) < 1e-12);
      CHECK(rel(r.bar_beta(k), s.bar_beta(1000)) < 1e-12);
    }
    CHECK_THROWS_AS(respace(s, 0), Error);
    CHECK_THROWS_AS(respace(s, 1001), Error);
  }

  TEST_CASE("respacing composes with the timestep map") {
    const DiffusionSchedule s = build_cosine_halved(120);
    const DiffusionSchedule twice = respace(respace(s, 60), 30);
    const DiffusionSchedule once = respace(s, 30);
    for (int i = 0; i <= 30; ++i) {
      CHECK(twice.model_timestep(i) == once.model_timestep(i));
      CHECK(rel(twice.bar_alpha(i), once.bar_alpha(i)) < 1e-12);
      if (i > 0) CHECK(rel(twice.bar_beta(i), once.bar_beta(i)) < 1e-12);
    }
  }
}
