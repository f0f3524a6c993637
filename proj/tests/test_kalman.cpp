#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "tilt/errors.hpp"
#include "tilt/kalman.hpp"

using namespace tilt;

namespace {

Eigen::Matrix2d random_psd(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::Matrix2d M;
  M << d(rng), d(rng), d(rng), d(rng);
  Eigen::Matrix2d P = M * M.transpose();
  P(0, 0) += 1e-6;
  P(1, 1) += 1e-6;
  return P;
}

}  // namespace

TEST_CASE("predict integrates the rate input") {
  const auto model = KalmanModel::imu(0.01, Eigen::Matrix2d::Zero(), 1e-4);
  KalmanState s;
  s.P = Eigen::Matrix2d::Identity();
  const auto out = predict(s, model, 1.0);
  CHECK(out.x(0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(out.x(1) == 0.0);
}

TEST_CASE("predict cancels the input against the bias state") {
  const auto model = KalmanModel::imu(0.037, Eigen::Matrix2d::Zero(), 1e-4);
  KalmanState s;
  s.x << 0.42, 0.7;
  const auto out = predict(s, model, 0.7);  // u equals the bias
  CHECK(out.x(0) == doctest::Approx(0.42).epsilon(1e-15));
  CHECK(out.x(1) == 0.7);
}

TEST_CASE("predict covariance propagation with Q=0") {
  const double dt = 0.01;
  const auto model = KalmanModel::imu(dt, Eigen::Matrix2d::Zero(), 1e-4);
  KalmanState s;  // P = I
  const auto out = predict(s, model, 0.0);
  CHECK(out.P(0, 0) == doctest::Approx(1.0 + dt * dt).epsilon(1e-15));
  CHECK(out.P(0, 1) == doctest::Approx(-dt).epsilon(1e-15));
  CHECK(out.P(1, 0) == doctest::Approx(-dt).epsilon(1e-15));
  CHECK(out.P(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("update with equal confidence averages prior and measurement") {
  const double R = 0.04;
  const auto model = KalmanModel::imu(0.01, Eigen::Matrix2d::Zero(), R);
  KalmanState s;
  s.x << 0.2, 0.0;
  s.P << R, 0.0, 0.0, 0.0;
  const auto out = update(s, model, 0.6);
  CHECK(out.x(0) == doctest::Approx(0.4).epsilon(1e-12));  // (0.2+0.6)/2
}

TEST_CASE("zero innovation leaves the mean but shrinks the variance") {
  const auto model = KalmanModel::imu(0.01, Eigen::Matrix2d::Zero(), 1e-4);
  KalmanState s;
  s.x << 0.3, 0.01;
  s.P = Eigen::Vector2d(1e-2, 1e-4).asDiagonal();
  const auto out = update(s, model, 0.3);
  CHECK(out.x(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(out.x(1) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(out.P(0, 0) < s.P(0, 0));
}

TEST_CASE("posterior tilt variance follows the scalar update law") {
  std::mt19937_64 rng(7);
  const auto model = KalmanModel::imu(1e-3, Eigen::Matrix2d::Zero(), 2.5e-3);
  for (int trial = 0; trial < 1000; ++trial) {
    KalmanState s;
    s.P = random_psd(rng);
    s.x << 0.1, 0.0;
    const double prior_var = (model.H * s.P * model.H.transpose())(0);
    const auto post = update(s, model, 0.4);
    const double post_var = (model.H * post.P * model.H.transpose())(0);
    CHECK(std::abs(post_var - updated_sigma(prior_var, model.R)) <= 1e-12);
    CHECK(post_var <= prior_var + 1e-15);
  }
}

TEST_CASE("joseph form matches the plain update on the tilt variance") {
  auto model = KalmanModel::imu(1e-3, Eigen::Matrix2d::Zero(), 1e-3);
  KalmanState s;
  s.P << 4e-3, 1e-4, 1e-4, 2e-4;
  s.x << 0.0, 0.0;
  const auto plain = update(s, model, 0.1);
  model.joseph_update = true;
  const auto joseph = update(s, model, 0.1);
  CHECK((plain.P - joseph.P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((plain.x - joseph.x).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gaussian fusion closed forms") {
  const auto eq = fuse_gaussians({1.0, 0.3}, {2.0, 0.3});
  CHECK(eq.mean == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(eq.variance == doctest::Approx(0.15).epsilon(1e-15));

  const auto certain = fuse_gaussians({5.0, 1.0}, {-3.0, 1e-12});
  CHECK(certain.mean == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(certain.variance < 1.1e-12);

  CHECK_THROWS_AS(fuse_gaussians({0.0, 0.0}, {0.0, 1.0}), NumericError);
}

TEST_CASE("fusion equals the normalized product of densities") {
  // The log of the product of two Gaussian densities is an exact parabola,
  // so a three-point stencil at the grid peak recovers its vertex and
  // curvature without truncation error.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> um(-2.0, 2.0);
  std::uniform_real_distribution<double> uv(0.05, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Gaussian1D a{um(rng), uv(rng)};
    const Gaussian1D b{um(rng), uv(rng)};
    const auto fused = fuse_gaussians(a, b);

    const double lo = std::min(a.mean, b.mean) - 6.0;
    const double hi = std::max(a.mean, b.mean) + 6.0;
    const std::size_t n = 4001;
    const double step = (hi - lo) / static_cast<double>(n - 1);
    std::vector<double> logp(n);
    std::size_t peak = 0;
    Eigen::VectorXd ma(1), mb(1), x(1);
    Eigen::MatrixXd ca(1, 1), cb(1, 1);
    ma << a.mean;
    mb << b.mean;
    ca << a.variance;
    cb << b.variance;
    for (std::size_t i = 0; i < n; ++i) {
      x << lo + step * static_cast<double>(i);
      logp[i] = std::log(gaussian_pdf(x, ma, ca)) +
                std::log(gaussian_pdf(x, mb, cb));
      if (logp[i] > logp[peak]) peak = i;
    }
    REQUIRE(peak > 0);
    REQUIRE(peak + 1 < n);
    const double num = logp[peak + 1] - logp[peak - 1];
    const double den = logp[peak + 1] - 2.0 * logp[peak] + logp[peak - 1];
    const double vertex =
        lo + step * (static_cast<double>(peak) - num / (2.0 * den));
    const double curvature = den / (step * step);  // = -1/variance
    CHECK(std::abs(vertex - fused.mean) < 1e-6);
    CHECK(std::abs(-1.0 / curvature - fused.variance) < 1e-6);
  }
}

TEST_CASE("fusion is commutative, associative, symmetric in variance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> um(-3.0, 3.0);
  std::uniform_real_distribution<double> uv(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Gaussian1D a{um(rng), uv(rng)}, b{um(rng), uv(rng)}, c{um(rng), uv(rng)};
    const auto ab = fuse_gaussians(a, b);
    const auto ba = fuse_gaussians(b, a);
    CHECK(ab.mean == doctest::Approx(ba.mean).epsilon(1e-13));
    CHECK(ab.variance == doctest::Approx(ba.variance).epsilon(1e-13));
    const auto ab_c = fuse_gaussians(ab, c);
    const auto a_bc = fuse_gaussians(a, fuse_gaussians(b, c));
    CHECK(ab_c.mean == doctest::Approx(a_bc.mean).epsilon(1e-12));
    CHECK(ab_c.variance == doctest::Approx(a_bc.variance).epsilon(1e-12));
  }
}

TEST_CASE("scalar filter update equals gaussian fusion") {
  const double R = 7e-4;
  const auto model = KalmanModel::imu(1e-3, Eigen::Matrix2d::Zero(), R);
  KalmanState s;
  s.x << 0.25, 0.0;
  s.P << 3e-3, 0.0, 0.0, 0.0;  // scalar problem embedded in the tilt slot
  const double z = 0.31;
  const auto post = update(s, model, z);
  const auto fused = fuse_gaussians({0.25, 3e-3}, {z, R});
  CHECK(std::abs(post.x(0) - fused.mean) <= 1e-12);
  CHECK(std::abs(post.P(0, 0) - fused.variance) <= 1e-12);
}

TEST_CASE("updated_sigma closed forms and monotonicity") {
  CHECK(updated_sigma(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(updated_sigma(1.0, 4.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(updated_sigma(1.0, 4.0) < 1.0);

  double prev = 0.0;
  for (double R = 0.1; R <= 10.0; R += 0.1) {
    const double v = updated_sigma(1.7, R);
    CHECK(v > prev);
    CHECK(v < std::min(1.7, R));
    prev = v;
  }
  CHECK_THROWS_AS(updated_sigma(0.0, 1.0), NumericError);
}

TEST_CASE("gaussian density closed forms") {
  Eigen::VectorXd x(1), m(1);
  Eigen::MatrixXd c(1, 1);
  x << 0.0;
  m << 0.0;
  c << 1.0;
  CHECK(gaussian_pdf(x, m, c) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));

  const double sigma2 = 0.49;
  Eigen::VectorXd x3 = Eigen::VectorXd::Constant(3, 0.2);
  Eigen::MatrixXd c3 = sigma2 * Eigen::MatrixXd::Identity(3, 3);
  CHECK(gaussian_pdf(x3, x3, c3) ==
        doctest::Approx(std::pow(2.0 * std::numbers::pi * sigma2, -1.5))
            .epsilon(1e-12));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(gaussian_pdf(z2, z2, bad), NumericError);
}

TEST_CASE("gaussian density integrates to one") {
  Eigen::VectorXd m(1);
  Eigen::MatrixXd c(1, 1);
  m << 0.7;
  c << 0.09;
  const double sd = 0.3;
  const std::size_t n = 200001;
  const double lo = 0.7 - 10.0 * sd, hi = 0.7 + 10.0 * sd;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  double acc = 0.0;
  Eigen::VectorXd x(1);
  for (std::size_t i = 0; i < n; ++i) {
    x << lo + step * static_cast<double>(i);
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * gaussian_pdf(x, m, c);
  }
  CHECK(acc * step == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant measurement drives the filter to the measurement") {
  const double dt = 1e-3;
  Eigen::Matrix2d Q = Eigen::Vector2d(1e-8, 1e-10).asDiagonal();
  const auto model = KalmanModel::imu(dt, Q, 1e-4);
  const std::size_t n = 4000;
  std::vector<double> gyro(n, 0.0);
  std::vector<std::optional<double>> z(n, 0.5);
  const auto states = run_filter(model, KalmanState{}, gyro, z);
  CHECK(std::abs(states.back().x(0) - 0.5) < 1e-3);
  // after settling, the gap to the measurement shrinks monotonically
  for (std::size_t k = 50; k + 1 < n; ++k) {
    const double a = std::abs(states[k].x(0) - 0.5);
    const double b = std::abs(states[k + 1].x(0) - 0.5);
    CHECK(b <= a + 1e-15);
  }
}

TEST_CASE("constant gyro bias is absorbed into the bias state") {
  const double dt = 1e-3, beta = 0.02;
  Eigen::Matrix2d Q = Eigen::Vector2d(1e-6, 1e-7).asDiagonal();
  const auto model = KalmanModel::imu(dt, Q, 1e-6);
  const std::size_t n = 20000;
  std::vector<double> gyro(n, beta);           // true rate is zero
  std::vector<std::optional<double>> z(n, 0.1);  // truth-anchored measurement
  KalmanState x0;
  x0.x << 0.1, 0.0;
  x0.P = Eigen::Vector2d(1e-2, 1e-4).asDiagonal();
  const auto states = run_filter(model, x0, gyro, z);
  CHECK(std::abs(states.back().x(1) / beta - 1.0) < 0.05);
}

TEST_CASE("missing measurements give predict-only steps") {
  const double dt = 1e-3;
  Eigen::Matrix2d Q = Eigen::Vector2d(1e-6, 1e-8).asDiagonal();
  const auto model = KalmanModel::imu(dt, Q, 1e-4);
  std::vector<double> gyro(10, 0.0);
  std::vector<std::optional<double>> z(10);
  z[9] = 0.0;
  const auto states = run_filter(model, KalmanState{}, gyro, z);
  // variance grows while no measurement arrives, then contracts
  for (std::size_t k = 1; k < 9; ++k)
    CHECK(states[k].P(0, 0) > states[k - 1].P(0, 0));
  CHECK(states[9].P(0, 0) < states[8].P(0, 0));
}

TEST_CASE("covariances stay symmetric and positive semidefinite") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double dt = 1e-3;
  Eigen::Matrix2d Q = Eigen::Vector2d(1e-6, 1e-8).asDiagonal();
  const auto model = KalmanModel::imu(dt, Q, 1e-4);
  const std::size_t n = 5000;
  std::vector<double> gyro(n);
  std::vector<std::optional<double>> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    gyro[k] = dist(rng);
    if (k % 3 != 0) z[k] = 0.1 * dist(rng);
  }
  const auto states = run_filter(model, KalmanState{}, gyro, z);
  for (const auto& s : states) {
    CHECK((s.P - s.P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("model validation rejects broken inputs") {
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  CHECK_THROWS_AS(KalmanModel::imu(1e-3, Q, 0.0), UsageError);
  Eigen::Matrix2d bad;
  bad << 1.0, 1.0, -1.0, 1.0;
  CHECK_THROWS_AS(KalmanModel::imu(1e-3, bad, 1e-4), UsageError);
  auto model = KalmanModel::imu(1e-3, Q, 1e-4);
  model.A(0, 1) = 0.5;  // break the structure
  CHECK_THROWS_AS(model.validate(), UsageError);
}
