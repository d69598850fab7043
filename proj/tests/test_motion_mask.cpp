#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hawk/motion_mask.hpp"

using namespace hawk;

namespace {

FlowField random_flow(std::uint64_t seed, int h, int w, double amp) {
  FlowField f(h, w);
  Rng rng(seed);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = rng.uniform(-amp, amp);
    f.v[i] = rng.uniform(-amp, amp);
  }
  return f;
}

}  // namespace

TEST_CASE("mask is the min-max normalized flow magnitude") {
  FlowField f(2, 2);
  f.u = {0.0, 3.0, 0.0, 1.0};
  f.v = {0.0, 4.0, 2.0, 0.0};
  // magnitudes: 0, 5, 2, 1  ->  (m - 0) / 5
  std::vector<double> mask = build_mask(f);
  CHECK(mask[0] == doctest::Approx(0.0));
  CHECK(mask[1] == doctest::Approx(1.0));
  CHECK(mask[2] == doctest::Approx(0.4));
  CHECK(mask[3] == doctest::Approx(0.2));
}

TEST_CASE("mask properties hold over many random flows") {
  for (int trial = 0; trial < 100; ++trial) {
    FlowField f = random_flow(1000 + trial, 9, 11, 2.5);
    std::vector<double> mask = build_mask(f);
    REQUIRE(mask.size() == f.u.size());
    double lo = 2.0, hi = -1.0;
    for (double m : mask) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(1.0));
    // ordering is preserved: the largest magnitude pixel maps to 1
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      double m = std::hypot(f.u[i], f.v[i]);
      if (m > best) {
        best = m;
        argmax = i;
      }
    }
    CHECK(mask[argmax] == doctest::Approx(1.0));
  }
}

TEST_CASE("constant magnitude maps to all ones or all zeros") {
  FlowField zero(4, 4);
  std::vector<double> mz = build_mask(zero);
  for (double m : mz) CHECK(m == 0.0);

  FlowField c(4, 4);
  std::fill(c.u.begin(), c.u.end(), 0.6);
  std::fill(c.v.begin(), c.v.end(), -0.8);
  std::vector<double> mc = build_mask(c);
  for (double m : mc) CHECK(m == 1.0);
}

TEST_CASE("build_mask rejects non-finite flow") {
  FlowField f(3, 3);
  f.u[4] = std::nan("");
  CHECK_THROWS_AS(build_mask(f), InvalidInput);
}

TEST_CASE("apply_mask multiplies every channel by the per-frame mask") {
  int t = 3, c = 2, h = 4, w = 4;
  std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<float> frames(t * c * plane);
  Rng rng(5);
  for (float& v : frames) v = static_cast<float>(rng.uniform());
  std::vector<FlowField> flows{random_flow(70, h, w, 1.0),
                               random_flow(71, h, w, 1.0)};
  MotionClip mc = apply_mask(frames, t, c, h, w, flows);
  CHECK(mc.frames.size() == frames.size());
  CHECK(mc.masks.size() == plane * t);
  for (int ti = 0; ti < t; ++ti) {
    std::vector<double> mask = build_mask(flows[ti == 0 ? 0 : ti - 1]);
    for (std::size_t i = 0; i < plane; ++i)
      CHECK(mc.masks[ti * plane + i] == doctest::Approx(mask[i]));
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < plane; ++i) {
        std::size_t j = (static_cast<std::size_t>(ti) * c + ch) * plane + i;
        CHECK(mc.frames[j] ==
              doctest::Approx(static_cast<float>(mask[i] * frames[j])));
      }
  }
}

TEST_CASE("frame zero borrows the first flow mask") {
  int t = 2, c = 1, h = 3, w = 3;
  std::size_t plane = 9;
  std::vector<float> frames(t * plane, 1.0f);
  std::vector<FlowField> flows{random_flow(90, h, w, 2.0)};
  MotionClip mc = apply_mask(frames, t, c, h, w, flows);
  for (std::size_t i = 0; i < plane; ++i)
    CHECK(mc.masks[i] == doctest::Approx(mc.masks[plane + i]));
}

TEST_CASE("zero mask pixels produce zero masked appearance") {
  int t = 2, c = 3, h = 4, w = 4;
  std::size_t plane = 16;
  std::vector<float> frames(t * c * plane, 0.9f);
  FlowField f(h, w);
  f.u[5] = 2.0;  // single moving pixel; the rest stays at magnitude 0
  std::vector<FlowField> flows{f};
  MotionClip mc = apply_mask(frames, t, c, h, w, flows);
  for (int ti = 0; ti < t; ++ti)
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < plane; ++i) {
        std::size_t j = (static_cast<std::size_t>(ti) * c + ch) * plane + i;
        if (i == 5)
          CHECK(mc.frames[j] == doctest::Approx(0.9f));
        else
          CHECK(mc.frames[j] == 0.0f);
      }
}

TEST_CASE("apply_mask validates shapes") {
  std::vector<float> frames(2 * 1 * 4 * 4, 0.5f);
  std::vector<FlowField> flows{random_flow(1, 4, 4, 1.0)};
  CHECK_THROWS_AS(apply_mask(frames, 1, 1, 4, 4, {}), InvalidInput);
  CHECK_THROWS_AS(apply_mask(frames, 2, 1, 4, 4, {}), InvalidInput);
  std::vector<FlowField> wrong{random_flow(1, 4, 5, 1.0)};
  CHECK_THROWS_AS(apply_mask(frames, 2, 1, 4, 4, wrong), InvalidInput);
  frames.pop_back();
  CHECK_THROWS_AS(apply_mask(frames, 2, 1, 4, 4, flows), InvalidInput);
}
