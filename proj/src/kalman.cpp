#include "tilt/kalman.hpp"

#include <cmath>
#include <numbers>

#include "tilt/errors.hpp"

namespace tilt {

KalmanModel KalmanModel::imu(double dt, const Eigen::Matrix2d& Q, double R) {
  KalmanModel m;
  m.dt = dt;
  m.A << 1.0, -dt, 0.0, 1.0;
  m.B << dt, 0.0;
  m.H << 1.0, 0.0;
  m.Q = Q;
  m.R = R;
  m.validate();
  return m;
}

void KalmanModel::validate() const {
  if (!(R > 0.0)) throw UsageError("kalman model: R must be > 0");
  if (!(dt > 0.0)) throw UsageError("kalman model: dt must be > 0");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw UsageError("kalman model: Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Q);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw UsageError("kalman model: Q must be positive semidefinite");
  if (A(0, 0) != 1.0 || A(1, 0) != 0.0 || A(1, 1) != 1.0 || A(0, 1) != -dt ||
      B(0) != dt || B(1) != 0.0 || H(0) != 1.0 || H(1) != 0.0)
    throw UsageError("kalman model: A, B, H must have the tilt/bias structure");
}

KalmanState predict(const KalmanState& state, const KalmanModel& model,
                    double u) {
  KalmanState out;
  out.x = model.A * state.x + model.B * u;
  out.P = model.A * state.P * model.A.transpose() + model.Q;
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

KalmanState update(const KalmanState& state, const KalmanModel& model,
                   double z) {
  const double s = model.H * state.P * model.H.transpose() + model.R;
  if (!(s > 0.0))
    throw NumericError("kalman update: innovation variance not positive");
  const Eigen::Vector2d K = state.P * model.H.transpose() / s;
  KalmanState out;
  out.x = state.x + K * (z - model.H * state.x);
  if (model.joseph_update) {
    const Eigen::Matrix2d IKH = Eigen::Matrix2d::Identity() - K * model.H;
    out.P = IKH * state.P * IKH.transpose() + K * model.R * K.transpose();
  } else {
    out.P = state.P - K * model.H * state.P;
  }
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

Gaussian1D fuse_gaussians(const Gaussian1D& a, const Gaussian1D& b) {
  if (!(a.variance > 0.0) || !(b.variance > 0.0))
    throw NumericError("fuse_gaussians: variances must be > 0");
  const double denom = a.variance + b.variance;
  return {(a.mean * b.variance + b.mean * a.variance) / denom,
          a.variance * b.variance / denom};
}

double updated_sigma(double sigma_x, double R) {
  if (!(sigma_x > 0.0) || !(R > 0.0))
    throw NumericError("updated_sigma: inputs must be > 0");
  return sigma_x * R / (sigma_x + R);
}

double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
  const auto k = static_cast<std::size_t>(x.size());
  if (mean.size() != x.size() || cov.rows() != x.size() || cov.cols() != x.size())
    throw UsageError("gaussian_pdf: dimension mismatch");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericError("gaussian_pdf: covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericError("gaussian_pdf: covariance must be positive definite");
  const Eigen::VectorXd d = x - mean;
  const Eigen::VectorXd w = llt.matrixL().solve(d);
  double log_det = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    log_det += std::log(llt.matrixL()(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(i)));
  const double log_norm =
      -0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi) - log_det;
  return std::exp(log_norm - 0.5 * w.squaredNorm());
}

std::vector<KalmanState> run_filter(const KalmanModel& model,
                                    const KalmanState& x0,
                                    std::span<const double> gyro,
                                    std::span<const std::optional<double>> z) {
  if (gyro.size() != z.size())
    throw UsageError("run_filter: gyro and measurement sequences must align");
  model.validate();
  std::vector<KalmanState> out;
  out.reserve(gyro.size());
  KalmanState st = x0;
  for (std::size_t k = 0; k < gyro.size(); ++k) {
    st = predict(st, model, gyro[k]);
    if (z[k]) st = update(st, model, *z[k]);
    out.push_back(st);
  }
  return out;
}

}  // namespace tilt
