#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "diffrace/geometry.hpp"
#include "fixtures.hpp"

using namespace diffrace;

namespace {

// Oracle: accumulate arg(z - p) over a dense polyline along a -> b.
double dense_subtended(Point a, Point b, Point p, int steps = 200000) {
  double total = 0.0;
  Point prev = a - p;
  for (int i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const Point cur = (a + t * (b - a)) - p;
    total += std::atan2(cross(prev, cur), dot(prev, cur));
    prev = cur;
  }
  return total;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::InvalidScene;
}

}  // namespace

TEST(ValidateConfig, TwoPointsAreValid) {
  const auto c = validate_config({{{0, 0}, {1, 0}}, {0.5, 0.5}, {}});
  EXPECT_EQ(c.size(), 2u);
}

TEST(ValidateConfig, ReportsCollinearTripleWithIndices) {
  try {
    validate_config({{{0, 0}, {1, 1}, {2, 2}}, {0.3, 0.4, 0.5}, {}});
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_TRUE(e.has(ErrorCode::CollinearTriple));
    EXPECT_EQ(e.violations().front().where, "0,1,2");
  }
}

TEST(ValidateConfig, FluxAtOneIsOutOfRange) {
  try {
    validate_config({{{0, 0}}, {1.0}, {}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has(ErrorCode::FluxOutOfRange));
  }
}

TEST(ValidateConfig, CollectsEveryViolation) {
  try {
    validate_config({{{0, 0}, {0, 0}, {1, 1}, {2, 2}}, {0.0, 0.5, 1.5, 0.5}, {}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.has(ErrorCode::FluxOutOfRange));
    EXPECT_TRUE(e.has(ErrorCode::DuplicateSolenoid));
    EXPECT_TRUE(e.has(ErrorCode::CollinearTriple));
    int flux_errors = 0;
    for (const auto& v : e.violations()) flux_errors += v.code == ErrorCode::FluxOutOfRange;
    EXPECT_EQ(flux_errors, 2);
  }
}

TEST(ValidateConfig, MismatchedOrEmptyListsRejected) {
  EXPECT_THROW(validate_config({{{0, 0}, {1, 0}}, {0.5}, {}}), ValidationError);
  EXPECT_THROW(validate_config({{}, {}, {}}), ValidationError);
}

TEST(ValidateConfig, InvariantUnderRigidMotions) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    SceneInput in;
    for (int i = 0; i < 4; ++i) {
      in.positions.push_back({u(rng), u(rng)});
      in.fluxes.push_back(0.5);
    }
    // Half the trials carry an exactly collinear triple.
    if (trial % 2) in.positions[2] = 0.5 * (in.positions[0] + in.positions[1]);
    const double phi = u(rng);
    const Point shift{u(rng), u(rng)};
    SceneInput moved = in;
    for (auto& p : moved.positions)
      p = Point{std::cos(phi) * p.x - std::sin(phi) * p.y, std::sin(phi) * p.x + std::cos(phi) * p.y} + shift;
    auto accepted = [](const SceneInput& s) {
      try {
        validate_config(s);
        return true;
      } catch (const ValidationError&) {
        return false;
      }
    };
    EXPECT_EQ(accepted(in), accepted(moved)) << "trial " << trial;
  }
}

TEST(WrapAngle, RangeIsHalfOpen) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-5 * kPi / 2), -kPi / 2, 1e-15);
}

TEST(DiffractionAngle, BackScatteringIsZero) {
  EXPECT_EQ(diffraction_angle({0, 0}, {1, 0}, {0, 0}).value(), 0.0);
}

TEST(DiffractionAngle, StraightPassageIsGeometric) {
  EXPECT_EQ(code_of([] { diffraction_angle({0, 0}, {1, 0}, {2, 0}); }), ErrorCode::GeometricAngle);
}

TEST(DiffractionAngle, CounterclockwiseEquilateralTriangle) {
  const auto p = fixture::triangle_points();
  for (int i = 0; i < 3; ++i) {
    const Point prev = p[(i + 2) % 3], v = p[i], next = p[(i + 1) % 3];
    // Definition route: theta_out - theta_in from polar angles, wrapped by hand.
    double expected = std::atan2(next.y - v.y, next.x - v.x) - std::atan2(prev.y - v.y, prev.x - v.x);
    while (expected > kPi) expected -= 2 * kPi;
    while (expected <= -kPi) expected += 2 * kPi;
    EXPECT_NEAR(expected, -kPi / 3, 1e-15);
    EXPECT_NEAR(diffraction_angle(prev, v, next).value(), -kPi / 3, 1e-15);
  }
}

TEST(DiffractionAngle, ExactlyAntisymmetricUnderReversal) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 10000; ++i) {
    const Point a{u(rng), u(rng)}, v{u(rng), u(rng)}, b{u(rng), u(rng)};
    try {
      const double fwd = diffraction_angle(a, v, b).value();
      EXPECT_EQ(fwd, -diffraction_angle(b, v, a).value());
    } catch (const Error&) {
    }
  }
}

TEST(SubtendedAngle, QuarterTurnsAndSign) {
  EXPECT_NEAR(subtended_angle({1, 0}, {0, 1}, {0, 0}), kPi / 2, 1e-15);
  EXPECT_NEAR(subtended_angle({0, 1}, {1, 0}, {0, 0}), -kPi / 2, 1e-15);
}

TEST(SubtendedAngle, MatchesDenseSampling) {
  // (1,0) -> (-1,2) seen from the origin sweeps pi - atan(2).
  const double oracle = dense_subtended({1, 0}, {-1, 2}, {0, 0});
  EXPECT_NEAR(oracle, kPi - std::atan(2.0), 1e-12);
  EXPECT_NEAR(subtended_angle({1, 0}, {-1, 2}, {0, 0}), 2.0344439357957027, 1e-15);
}

TEST(SubtendedAngle, PointOnSegmentRejected) {
  EXPECT_EQ(code_of([] { subtended_angle({2, 0}, {0, 2}, {1, 1}); }), ErrorCode::PointOnSegment);
  EXPECT_EQ(code_of([] { subtended_angle({0, 0}, {1, 0}, {0, 0}); }), ErrorCode::PointOnSegment);
}

TEST(SubtendedAngle, AdditiveAlongSubdividedSegment) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3), t(0.05, 0.95);
  int checked = 0;
  while (checked < 5000) {
    const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, p{u(rng), u(rng)};
    if (distance_to_segment(a, b, p) < 1e-2) continue;
    const Point m = a + t(rng) * (b - a);
    EXPECT_NEAR(subtended_angle(a, m, p) + subtended_angle(m, b, p), subtended_angle(a, b, p), 1e-12);
    ++checked;
  }
}

TEST(FreeReference, WeightedCenter) {
  auto r = free_reference_params(validate_config({{{0, 0}, {2, 0}}, {0.5, 0.5}, {}}));
  EXPECT_DOUBLE_EQ(r.total_flux, 1.0);
  EXPECT_DOUBLE_EQ(r.center.x, 1.0);
  EXPECT_DOUBLE_EQ(r.center.y, 0.0);

  r = free_reference_params(validate_config({{{0, 0}}, {0.3}, {}}));
  EXPECT_DOUBLE_EQ(r.total_flux, 0.3);
  EXPECT_DOUBLE_EQ(r.center.x, 0.0);

  r = free_reference_params(validate_config({{{0, 0}, {3, 0}}, {0.25, 0.75}, {}}));
  EXPECT_DOUBLE_EQ(r.total_flux, 1.0);
  EXPECT_DOUBLE_EQ(r.center.x, 2.25);
}
