// Linear Kalman filter for the [tilt; gyro-bias] state, scalar Gaussian
// fusion, and the scalar posterior-variance law.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace tilt {

struct KalmanModel {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;
  Eigen::RowVector2d H;
  Eigen::Matrix2d Q;
  double R = 1e-4;
  double dt = 1e-3;
  bool joseph_update = false;  // numerically robust covariance form

  // Standard tilt/bias structure for a given step: A=[[1,-dt],[0,1]],
  // B=[dt;0], H=[1,0].
  static KalmanModel imu(double dt, const Eigen::Matrix2d& Q, double R);
  void validate() const;
};

struct KalmanState {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();  // [theta; bias]
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();

  double theta() const { return x(0); }
  double bias() const { return x(1); }
};

struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;
};

// x <- A x + B u, P <- A P A^T + Q (symmetry re-enforced).
KalmanState predict(const KalmanState& state, const KalmanModel& model,
                    double u);

// Measurement update with gain K = P H^T (H P H^T + R)^-1.
KalmanState update(const KalmanState& state, const KalmanModel& model,
                   double z);

// Product of two scalar Gaussians, renormalized.
Gaussian1D fuse_gaussians(const Gaussian1D& a, const Gaussian1D& b);

// Posterior variance sigma*R/(sigma+R) of a scalar update.
double updated_sigma(double sigma_x, double R);

// Multivariate normal density.
double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov);

// Predict/update per sample; missing measurements give predict-only steps.
std::vector<KalmanState> run_filter(
    const KalmanModel& model, const KalmanState& x0,
    std::span<const double> gyro,
    std::span<const std::optional<double>> z);

}  // namespace tilt
