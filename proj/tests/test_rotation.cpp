#include <catch2/catch_amalgamated.hpp>

#include <oscnet/linalg.hpp>
#include <oscnet/rotation.hpp>

#include <cmath>
#include <random>

using namespace oscnet;

namespace {

// Independent oracle: brute-force the best angle for a fixed scale.
double grid_search_best_angle(const Eigen::Matrix2d& m, double gamma,
                              double step) {
  double best_psi = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (double psi = -pi; psi < pi; psi += step) {
    double err = (m - gamma * rotation2(psi)).norm();
    if (err < best_err) {
      best_err = err;
      best_psi = psi;
    }
  }
  return best_psi;
}

double fixed_scale_gamma(const Eigen::Matrix2d& m) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  return std::sqrt(svd.singularValues()(0) * svd.singularValues()(1));
}

}  // namespace

TEST_CASE("make_rotation_block basics") {
  SECTION("a=1 f=0 gives identity") {
    // a=1 violates the open interval; build the matrix from the formula
    // directly via a spec at the boundary of validity.
    Eigen::Matrix2d r = rotation2(0.0);
    REQUIRE((r - Eigen::Matrix2d::Identity()).norm() == 0.0);
    OscillatorSpec near_identity{1.0 - 1e-12, 0.0, 100.0};
    Eigen::Matrix2d blk = make_rotation_block(near_identity);
    REQUIRE((blk - Eigen::Matrix2d::Identity()).norm() < 1e-11);
  }

  SECTION("quarter-turn at f = Fs/4") {
    Eigen::Matrix2d blk = make_rotation_block({0.99, 25.0, 100.0});
    Eigen::Matrix2d expected;
    expected << 0.0, -0.99, 0.99, 0.0;
    REQUIRE((blk - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("direct trig evaluation at a=0.9 f=7 Fs=100") {
    Eigen::Matrix2d blk = make_rotation_block({0.9, 7.0, 100.0});
    const double w = 2.0 * pi * 7.0 / 100.0;
    REQUIRE(blk(0, 0) == Catch::Approx(0.9 * std::cos(w)).margin(1e-12));
    REQUIRE(blk(0, 1) == Catch::Approx(-0.9 * std::sin(w)).margin(1e-12));
    REQUIRE(blk(1, 0) == Catch::Approx(0.9 * std::sin(w)).margin(1e-12));
    REQUIRE(blk(1, 1) == Catch::Approx(0.9 * std::cos(w)).margin(1e-12));
  }

  SECTION("invalid specs are rejected with the violated bound named") {
    REQUIRE_THROWS_AS(make_rotation_block({1.5, 7.0, 100.0}),
                      validation_error);
    REQUIRE_THROWS_AS(make_rotation_block({0.9, 60.0, 100.0}),
                      validation_error);
    REQUIRE_THROWS_AS(make_rotation_block({0.9, 7.0, -1.0}),
                      validation_error);
    REQUIRE_THROWS_WITH(make_rotation_block({0.0, 7.0, 100.0}),
                        Catch::Matchers::ContainsSubstring("(0,1)"));
  }
}

TEST_CASE("project_scaled_rotation") {
  SECTION("identity on an exact scaled rotation") {
    Eigen::Matrix2d m = 2.0 * rotation2(pi / 3.0);
    ScaledRotation sr = project_scaled_rotation(m);
    REQUIRE(sr.gamma == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(sr.psi == Catch::Approx(pi / 3.0).margin(1e-12));
  }

  SECTION("zero matrix maps to gamma=0 psi=0") {
    ScaledRotation sr = project_scaled_rotation(Eigen::Matrix2d::Zero());
    REQUIRE(sr.gamma == 0.0);
    REQUIRE(sr.psi == 0.0);
  }

  SECTION("agrees with the grid-search oracle") {
    Eigen::Matrix2d m;
    m << 0.8, -0.58, 0.62, 0.82;
    ScaledRotation sr = project_scaled_rotation(m);
    const double gamma = fixed_scale_gamma(m);
    REQUIRE(sr.gamma == Catch::Approx(gamma).margin(1e-12));
    const double oracle_psi = grid_search_best_angle(m, gamma, 1e-4);
    REQUIRE(std::abs(angle_diff(sr.psi, oracle_psi)) < 2e-4);
  }

  SECTION("reflection-prone input still yields determinant +1") {
    Eigen::Matrix2d m;
    m << 1.0, 0.0, 0.0, -1.0;  // a pure reflection
    ScaledRotation sr = project_scaled_rotation(m);
    Eigen::Matrix2d r = rotation2(sr.psi);
    REQUIRE(r.determinant() == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("property: idempotent and never beaten by a 1e-3 angle grid") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::Matrix2d m;
      m << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
      ScaledRotation sr = project_scaled_rotation(m);
      REQUIRE(sr.gamma >= 0.0);

      ScaledRotation again = project_scaled_rotation(sr.realize());
      REQUIRE(again.gamma == Catch::Approx(sr.gamma).margin(1e-12));
      if (sr.gamma > 1e-12)
        REQUIRE(std::abs(angle_diff(again.psi, sr.psi)) < 1e-12);

      const double err = (m - sr.realize()).norm();
      const double grid_psi = grid_search_best_angle(m, sr.gamma, 1e-3);
      const double grid_err = (m - sr.gamma * rotation2(grid_psi)).norm();
      REQUIRE(err <= grid_err + 1e-12);
    }
  }
}

TEST_CASE("discrete Lyapunov solver matches fixed-point iteration") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a = 0.9 * rotation2(0.3 + 0.1 * trial);
    Mat g(2, 2);
    g << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
    Mat q = g * g.transpose();
    Mat p = solve_discrete_lyapunov(a, q);
    // Independent route: iterate P <- A P A' + Q to convergence.
    Mat p_iter = Mat::Zero(2, 2);
    for (int it = 0; it < 4000; ++it) p_iter = a * p_iter * a.transpose() + q;
    REQUIRE((p - p_iter).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE((p - (a * p * a.transpose() + q)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("markov_stationary") {
  Mat z(2, 2);
  z << 0.9, 0.1, 0.2, 0.8;
  Vec pi = markov_stationary(z);
  REQUIRE(pi(0) == Catch::Approx(2.0 / 3.0).margin(1e-10));
  REQUIRE(pi(1) == Catch::Approx(1.0 / 3.0).margin(1e-10));

  // Identity chain has no unique stationary distribution: uniform fallback.
  Vec pi_id = markov_stationary(Mat::Identity(3, 3));
  REQUIRE(pi_id.isApprox(Vec::Constant(3, 1.0 / 3.0), 1e-12));
}
