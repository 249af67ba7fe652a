// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nlq/core/errors.hpp"
#include "nlq/losses/losses.hpp"

using nlq::TimeSpan;
using nlq::Units;

namespace {

TimeSpan idx(double s, double e) { return {s, e, Units::index}; }

}  // namespace

TEST_CASE("alignment loss hand values") {
  const std::vector<double> o1{1.0}, s1{1.0 - 1e-7};
  CHECK(nlq::alignment_loss(o1, s1) == doctest::Approx(0.0).epsilon(1e-6));
  const std::vector<double> o{1.0, 0.0}, s{1.0 - 1e-7, 0.5};
  CHECK(std::abs(nlq::alignment_loss(o, s) - 0.346574) < 1e-6);
  CHECK(nlq::alignment_loss(o, s) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("alignment loss rejects empty or mismatched input") {
  const std::vector<double> none;
  CHECK_THROWS_AS(nlq::alignment_loss(none, none), nlq::InvalidArgument);
  const std::vector<double> a{0.5}, b{0.5, 0.5};
  CHECK_THROWS_AS(nlq::alignment_loss(a, b), nlq::ShapeError);
}

TEST_CASE("alignment loss is minimized at the target") {
  for (double target : {0.0, 0.2, 0.5, 0.73, 1.0}) {
    const std::vector<double> o{target};
    double best_s = -1.0, best = 1e300;
    for (int i = 1; i < 1000; ++i) {
      const std::vector<double> s{i / 1000.0};
      const double v = nlq::alignment_loss(o, s);
      CHECK(v >= 0.0);
      if (v < best) {
        best = v;
        best_s = s[0];
      }
    }
    CHECK(best_s == doctest::Approx(std::clamp(target, 0.001, 0.999)).epsilon(1e-9));
  }
}

TEST_CASE("alignment loss gradient") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> o(12), s(12);
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = i % 3 == 0 ? 0.0 : u(rng);
    s[i] = u(rng);
  }
  const auto g = nlq::alignment_loss_grad(o, s);
  const double n = static_cast<double>(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) {
    CHECK(g[i] == doctest::Approx((s[i] - o[i]) / (n * s[i] * (1.0 - s[i]))).epsilon(1e-12));
    const double h = 1e-6;
    auto sp = s, sm = s;
    sp[i] += h;
    sm[i] -= h;
    const double num = (nlq::alignment_loss(o, sp) - nlq::alignment_loss(o, sm)) / (2 * h);
    CHECK(std::abs(num - g[i]) <= 1e-6 * std::max(std::abs(g[i]), 1e-8) + 1e-10);
  }
}

TEST_CASE("alignment loss gradient vanishes where the clamp is active") {
  const std::vector<double> o{0.5, 0.5}, s{0.0, 1.0};
  const auto g = nlq::alignment_loss_grad(o, s);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(std::isfinite(nlq::alignment_loss(o, s)));
}

TEST_CASE("smooth L1 hand values and continuity") {
  CHECK(nlq::smooth_l1(0.0, 1.0) == 0.0);
  CHECK(nlq::smooth_l1(0.05, 1.0) == doctest::Approx(0.00125).epsilon(1e-14));
  CHECK(nlq::smooth_l1(2.0, 1.0) == 1.5);
  CHECK(nlq::smooth_l1(-2.0, 1.0) == 1.5);
  for (double beta : {0.1, 1.0, 3.0}) {
    const double d = 1e-9;
    CHECK(nlq::smooth_l1(beta - d, beta) == doctest::Approx(nlq::smooth_l1(beta + d, beta)).epsilon(1e-8));
    CHECK(nlq::smooth_l1_grad(beta - d, beta) == doctest::Approx(nlq::smooth_l1_grad(beta + d, beta)).epsilon(1e-8));
    CHECK(nlq::smooth_l1_grad(-beta - d, beta) == doctest::Approx(nlq::smooth_l1_grad(-beta + d, beta)).epsilon(1e-8));
  }
}

TEST_CASE("boundary loss hand value") {
  const std::vector<TimeSpan> pred{idx(20, 50)};
  const std::vector<std::uint8_t> mask{1};
  CHECK(std::abs(nlq::boundary_loss(pred, idx(25, 45), mask, 1.0, 100.0) - 0.0025) < 1e-9);
  CHECK(nlq::boundary_loss(pred, idx(20, 50), mask, 1.0, 100.0) == 0.0);
}

TEST_CASE("boundary loss ignores negatives and needs a positive") {
  std::vector<TimeSpan> pred{idx(20, 50), idx(0, 1), idx(3, 90)};
  const std::vector<std::uint8_t> mask{1, 0, 0};
  const double base = nlq::boundary_loss(pred, idx(25, 45), mask, 1.0, 100.0);
  pred[1] = idx(70, 99);
  pred[2] = idx(0, 0);
  CHECK(nlq::boundary_loss(pred, idx(25, 45), mask, 1.0, 100.0) == base);
  const std::vector<std::uint8_t> none{0, 0, 0};
  CHECK_THROWS_AS(nlq::boundary_loss(pred, idx(25, 45), none, 1.0, 100.0), nlq::NoPositivesError);
}

TEST_CASE("boundary loss grows with the residual scale") {
  const TimeSpan gt = idx(40, 60);
  const std::vector<std::uint8_t> mask{1, 1};
  double prev = -1.0;
  for (double c : {1.0, 1.5, 2.0, 10.0, 100.0}) {
    const std::vector<TimeSpan> pred{idx(40 - 3 * c, 60 + 2 * c), idx(40 + 1 * c, 60 - 4 * c)};
    const double v = nlq::boundary_loss(pred, gt, mask, 1.0, 100.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("boundary loss gradient matches finite differences") {
  const TimeSpan gt = idx(12, 30);
  std::vector<TimeSpan> pred{idx(10, 33), idx(14, 29), idx(0, 4)};
  const std::vector<std::uint8_t> mask{1, 1, 0};
  for (double norm : {1.0, 64.0}) {
    const auto g = nlq::boundary_loss_grad(pred, gt, mask, 1.0, norm);
    CHECK(g.d_start[2] == 0.0);
    CHECK(g.d_end[2] == 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
      const double h = 1e-6;
      auto p = pred, m = pred;
      p[i].start += h;
      m[i].start -= h;
      const double ns = (nlq::boundary_loss(p, gt, mask, 1.0, norm) - nlq::boundary_loss(m, gt, mask, 1.0, norm)) / (2 * h);
      CHECK(g.d_start[i] == doctest::Approx(ns).epsilon(1e-6));
      p = pred;
      m = pred;
      p[i].end += h;
      m[i].end -= h;
      const double ne = (nlq::boundary_loss(p, gt, mask, 1.0, norm) - nlq::boundary_loss(m, gt, mask, 1.0, norm)) / (2 * h);
      CHECK(g.d_end[i] == doctest::Approx(ne).epsilon(1e-6));
    }
  }
}

TEST_CASE("total loss composition") {
  const auto t = nlq::total_loss(0.346574, 0.0025, 1.0);
  CHECK(t.total == 0.346574 + 1.0 * 0.0025);
  CHECK(t.total == doctest::Approx(0.349074).epsilon(1e-12));
  CHECK(t.align == 0.346574);
  CHECK(t.box == 0.0025);
  CHECK(t.mu == 1.0);
  CHECK(nlq::total_loss(0.3, 0.7, 0.0).total == 0.3);
  CHECK(nlq::total_loss(0.3, 0.0, 5.0).total == 0.3);
  CHECK_THROWS_AS(nlq::total_loss(-0.1, 0.0, 1.0), nlq::InvalidArgument);
  CHECK_THROWS_AS(nlq::total_loss(0.1, 0.0, -1.0), nlq::InvalidArgument);
}
