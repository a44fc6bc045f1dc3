#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spinest/error.hpp"
#include "spinest/rotmath.hpp"

namespace rm = spinest::rotmath;
using rm::Vec3;
using std::numbers::pi;

namespace {

// Oracle: Rodrigues' formula, written independently of the library.
Eigen::Matrix3d rodrigues(const Vec3& axis, double angle) {
  const Vec3 k = axis.normalized();
  Eigen::Matrix3d kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * kx + (1 - std::cos(angle)) * kx * kx;
}

// Oracle: the textbook arccos form of the SO(3) distance.
double arccos_geodesic(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

rm::Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng), g(rng)};
}

}  // namespace

TEST(Quat, ConstructorNormalizes) {
  const rm::Quat q(2.0, 0.0, 0.0, 2.0);
  EXPECT_NEAR(q.coeffs().norm(), 1.0, 1e-12);
  EXPECT_NEAR(q.w(), std::sqrt(0.5), 1e-12);
}

TEST(Quat, ZeroQuaternionRejected) {
  EXPECT_THROW(rm::Quat(0, 0, 0, 0), spinest::Error);
}

TEST(Convert, IdentityQuatIsIdentityMatrix) {
  EXPECT_TRUE(rm::to_matrix(rm::Quat::identity()).matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST(Convert, QuarterTurnAboutZ) {
  const rm::Quat q = rm::to_quat(rm::AxisAngle(Vec3::UnitZ(), pi / 2));
  EXPECT_NEAR(q.w(), std::cos(pi / 4), 1e-12);
  EXPECT_NEAR(q.x(), 0.0, 1e-12);
  EXPECT_NEAR(q.y(), 0.0, 1e-12);
  EXPECT_NEAR(q.z(), std::sin(pi / 4), 1e-12);
}

TEST(Convert, MatrixMatchesRodriguesOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ang(0.0, pi);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis(g(rng), g(rng), g(rng));
    const double a = ang(rng);
    const Eigen::Matrix3d expected = rodrigues(axis, a);
    EXPECT_LT((rm::to_matrix(rm::AxisAngle(axis, a)).matrix() - expected).norm(), 1e-12);
  }
}

TEST(Convert, RoundTripsStayWithin1e9) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const rm::Quat q = random_quat(rng);
    const rm::RotMatrix r = rm::to_matrix(q);
    EXPECT_LT(rm::geodesic(r, rm::to_matrix(rm::to_quat(r))), 1e-9);
    EXPECT_LT(rm::geodesic(q, rm::to_quat(rm::to_axis_angle(q))), 1e-9);
    EXPECT_LT(rm::geodesic(r, rm::to_matrix(rm::to_axis_angle(r))), 1e-9);
  }
}

TEST(AxisAngle, CanonicalizesNegativeAngleAndPi) {
  const rm::AxisAngle neg(Vec3(0, 0, 2), -0.5);
  EXPECT_NEAR(neg.angle(), 0.5, 1e-15);
  EXPECT_TRUE(neg.axis().isApprox(Vec3(0, 0, -1)));

  const rm::AxisAngle half(Vec3(-1, 0, 0), pi);
  EXPECT_TRUE(half.axis().isApprox(Vec3(1, 0, 0)));
  const rm::AxisAngle wrapped(Vec3(0, 1, 0), 2 * pi + 0.25);
  EXPECT_NEAR(wrapped.angle(), 0.25, 1e-12);
}

TEST(AxisAngle, ZeroRotationVectorIsIdentity) {
  const rm::AxisAngle aa = rm::AxisAngle::from_rotation_vector(Vec3::Zero());
  EXPECT_EQ(aa.angle(), 0.0);
  EXPECT_NEAR(aa.axis().norm(), 1.0, 1e-15);
}

TEST(RotMatrix, RejectsNonRotations) {
  EXPECT_THROW(rm::RotMatrix(Eigen::Matrix3d::Identity() * 2.0), spinest::Error);
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(rm::RotMatrix{reflect}, spinest::Error);
}

TEST(Geodesic, KnownValues) {
  EXPECT_EQ(rm::geodesic(rm::RotMatrix::identity(), rm::RotMatrix::identity()), 0.0);
  const rm::RotMatrix rz(rodrigues(Vec3::UnitZ(), pi / 2));
  EXPECT_NEAR(rm::geodesic(rz, rm::RotMatrix::identity()), pi / 2, 1e-12);
  const rm::Quat q(std::cos(pi / 4), 0, 0, std::sin(pi / 4));
  EXPECT_NEAR(rm::geodesic(rm::Quat::identity(), q), pi / 2, 1e-12);
}

TEST(Geodesic, DoubleCover) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const rm::Quat q = random_quat(rng);
    EXPECT_EQ(rm::geodesic(q, -q), 0.0);
    EXPECT_EQ(rm::geodesic(q, q), 0.0);
  }
}

TEST(Geodesic, MatchesArccosOracleAndQuaternionForm) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const rm::Quat a = random_quat(rng), b = random_quat(rng);
    const rm::RotMatrix ra = rm::to_matrix(a), rb = rm::to_matrix(b);
    const double dm = rm::geodesic(ra, rb);
    EXPECT_NEAR(dm, rm::geodesic(a, b), 1e-9);
    EXPECT_NEAR(dm, arccos_geodesic(ra.matrix(), rb.matrix()), 1e-7);  // arccos loses digits near 0, pi
    EXPECT_GE(dm, 0.0);
    EXPECT_LE(dm, pi + 1e-12);
    EXPECT_NEAR(dm, rm::geodesic(rb, ra), 1e-12);
  }
}

TEST(Geodesic, TriangleInequality) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const rm::Quat a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    EXPECT_LE(rm::geodesic(a, c), rm::geodesic(a, b) + rm::geodesic(b, c) + 1e-9);
  }
}

TEST(VectorAngle, KnownValues) {
  const rm::Quat q = rm::Quat::identity();
  EXPECT_EQ(rm::vector_angle(q, q), 0.0);
  const rm::Quat rx = rm::to_quat(rm::AxisAngle(Vec3::UnitX(), pi / 2));
  EXPECT_TRUE(rm::logo_direction(rx).isApprox(Vec3(0, -1, 0), 1e-12));
  EXPECT_NEAR(rm::vector_angle(rx, q), pi / 2, 1e-12);
}

TEST(VectorAngle, TwistAboutLogoAxisIsInvisible) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const rm::Quat q = random_quat(rng);
    const Vec3 logo = rm::logo_direction(q);
    const rm::Quat twist = rm::to_quat(rm::AxisAngle(logo, 37.0 * pi / 180.0));
    EXPECT_NEAR(rm::vector_angle(q, twist * q), 0.0, 1e-7);
  }
}

TEST(VectorAngle, NeverExceedsGeodesic) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const rm::Quat a = random_quat(rng), b = random_quat(rng);
    EXPECT_LE(rm::vector_angle(a, b), rm::geodesic(a, b) + 1e-9);
  }
}

TEST(ConditionalLoss, ZeroForPerfectPrediction) {
  const rm::PoseOutput t({0.5, 0.5, 0.5, 0.5}, 1.0);
  for (auto norm : {rm::LossNorm::kSquared, rm::LossNorm::kAbsolute, rm::LossNorm::kGeodesic}) {
    EXPECT_NEAR(rm::conditional_loss(t, t, norm), 0.0, 1e-12);
  }
}

TEST(ConditionalLoss, SignAmbiguityGivesZero) {
  const rm::PoseOutput t({0.1, -0.7, 0.7, 0.1}, 1.0);
  const rm::PoseOutput o({-0.1, 0.7, -0.7, -0.1}, 1.0);
  for (auto norm : {rm::LossNorm::kSquared, rm::LossNorm::kAbsolute, rm::LossNorm::kGeodesic}) {
    EXPECT_NEAR(rm::conditional_loss(o, t, norm), 0.0, 1e-12);
  }
}

TEST(ConditionalLoss, GateIgnoresRotationWhenHidden) {
  const rm::PoseOutput t({0.3, 0.1, -0.2}, -1.0);
  const rm::PoseOutput o1({9.0, -4.0, 2.0}, 1.0);
  const rm::PoseOutput o2({0.0, 0.0, 0.0}, 1.0);
  // Absolute form: |o_v - t_v| = |1 - 0| = 1 exactly.
  EXPECT_EQ(rm::conditional_loss(o1, t, rm::LossNorm::kAbsolute), 1.0);
  for (auto norm : {rm::LossNorm::kSquared, rm::LossNorm::kAbsolute, rm::LossNorm::kGeodesic}) {
    EXPECT_EQ(rm::conditional_loss(o1, t, norm), rm::conditional_loss(o2, t, norm));
  }
}

TEST(ConditionalLoss, HandComputedValues) {
  // o_v = 0 -> 0.5, t_v = 1; squared: 0.25 + min(0.01 + 0.04, ...) with rotation diff (0.1, -0.2, 0).
  const rm::PoseOutput t({1.0, 0.0, 0.0}, 1.0);
  const rm::PoseOutput o({1.1, -0.2, 0.0}, 0.0);
  EXPECT_NEAR(rm::conditional_loss(o, t, rm::LossNorm::kSquared), 0.25 + 0.05, 1e-12);
  EXPECT_NEAR(rm::conditional_loss(o, t, rm::LossNorm::kAbsolute), 0.5 + 0.3, 1e-12);
}

TEST(ConditionalLoss, SignFlipOfOutputRotationLeavesLossUnchanged) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> r{g(rng), g(rng), g(rng), g(rng)};
    std::vector<double> neg{-r[0], -r[1], -r[2], -r[3]};
    const rm::PoseOutput t({g(rng), g(rng), g(rng), g(rng)}, 1.0);
    for (auto norm : {rm::LossNorm::kSquared, rm::LossNorm::kAbsolute, rm::LossNorm::kGeodesic}) {
      EXPECT_NEAR(rm::conditional_loss({r, 0.3}, t, norm), rm::conditional_loss({neg, 0.3}, t, norm),
                  1e-12);
    }
  }
}

TEST(ConditionalLoss, ContractViolations) {
  const rm::PoseOutput a({1, 0, 0, 0}, 1.0);
  const rm::PoseOutput b({0, 0, 0}, 1.0);
  try {
    rm::conditional_loss(a, b, rm::LossNorm::kSquared);
    FAIL();
  } catch (const spinest::Error& e) {
    EXPECT_EQ(e.kind(), spinest::ErrorKind::kContractViolation);
  }
  EXPECT_THROW(rm::conditional_loss(a, rm::PoseOutput({1, 0, 0, 0}, 0.2), rm::LossNorm::kSquared),
               spinest::Error);
}

TEST(PoseOutput, VisibilityClamped) {
  EXPECT_EQ(rm::PoseOutput({1, 0, 0}, 3.0).visibility, 1.0);
  EXPECT_EQ(rm::PoseOutput({1, 0, 0}, -7.0).visibility, -1.0);
}
