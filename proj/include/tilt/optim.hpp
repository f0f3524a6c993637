// Finite-difference Newton parameter estimation, the truth-referenced and
// gyro-referenced RMS costs, and the periodic live supervisor that retunes
// the generalized estimator while it runs.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tilt/estimators.hpp"

namespace tilt {

struct ParamVector {
  std::vector<double> values;
  std::vector<std::string> labels;

  std::size_t size() const { return values.size(); }
  void validate() const;
};

enum class HessianStencil {
  four_point,        // F(P+dj+dk) - F(P+dj) - F(P+dk) + F(P), consistent
  single_difference  // F(P+dj+dk) - F(P), kept for comparison experiments
};

struct NewtonConfig {
  double delta_p = 1e-6;   // perturbation, relative to parameter magnitude
  double delta_p_floor = 1e-9;  // absolute lower bound on the perturbation
  double h = 1.0;          // step scale
  int max_iters = 100;
  double tol = 1e-8;       // convergence threshold on the step norm
  double hessian_regularization = 1e-8;  // eigenvalue floor, relative to |H|
  bool backtracking = true;
  int max_halvings = 60;
  HessianStencil stencil = HessianStencil::four_point;
};

enum class CostKind { offline_truth, live_gyro };
enum class EstimatorAlgo { algo1, algo2, algo3 };

// Everything a cost evaluation needs: the dataset, which estimator to run,
// and (for the generalized estimator) which coefficients are free.
struct CostContext {
  CostKind kind = CostKind::offline_truth;
  EstimatorAlgo algo = EstimatorAlgo::algo2;
  EstimatorConfig cfg;
  std::vector<double> phi;
  std::vector<double> gyro;        // required by algo2/algo3 and the live cost
  std::vector<double> theta_true;  // required by the offline cost
  Algo3Params base3{};             // held values for non-free coefficients
  std::vector<std::string> free3 = {"K", "L", "M", "N"};

  void validate() const;
  // Parameter vector matching this context's free coefficients.
  ParamVector initial_params(const PendulumParams& p) const;
};

struct FitReport {
  ParamVector final_params;
  int iterations = 0;
  std::vector<double> cost_trace;
  bool converged = false;
  std::string estimator;
  std::string cost_kind;
};

using CostFn = std::function<double(const ParamVector&)>;

// Precomputes the derivative series once; evaluations then cost O(n) each
// and are safe to run concurrently.
class CostEvaluator {
public:
  explicit CostEvaluator(CostContext ctx);
  double operator()(const ParamVector& p) const;
  const CostContext& context() const { return ctx_; }

private:
  CostContext ctx_;
  std::vector<double> phi_dot_;
  std::vector<double> phi_ddot_;
  std::vector<double> gd_;
  std::size_t valid_from_ = 0;
  EstimateSeries estimate(const ParamVector& p) const;
  double offline_cost(const EstimateSeries& es) const;
  double live_cost(const EstimateSeries& es) const;
};

double rms_cost_offline(const ParamVector& p, const CostContext& ctx);
double rms_cost_live(const ParamVector& p, const CostContext& ctx);

// Forward difference (F(P + dp_j e_j) - F(P)) / dp_j per component.
ParamVector fd_gradient(const CostFn& F, const ParamVector& p, double delta_p);
Eigen::MatrixXd fd_hessian(const CostFn& F, const ParamVector& p,
                           double delta_p,
                           HessianStencil stencil = HessianStencil::four_point);

// Symmetric eigenvalue clamp: smallest eigenvalue of the result >= floor.
Eigen::MatrixXd regularize_hessian(const Eigen::MatrixXd& H, double floor);

FitReport newton_iterate(const CostFn& F, const ParamVector& p0,
                         const NewtonConfig& cfg);

// Binds the context's cost and runs the Newton loop.
FitReport fit_parameters(const CostContext& ctx, const ParamVector& p0,
                         const NewtonConfig& cfg);

// Atomic whole-vector publication; readers never observe a torn update.
class SnapshotBox {
public:
  void publish(ParamVector v);
  std::shared_ptr<const ParamVector> read() const;

private:
  mutable std::mutex mu_;
  std::shared_ptr<const ParamVector> cur_;
};

struct ParamSnapshot {
  double t = 0.0;
  ParamVector params;
  bool fit_ok = true;      // false: fit failed, previous values kept
  bool converged = false;
  double cost = 0.0;
  std::string message;
};

// Replays the dataset as a stream: every interval_s seconds fits the free
// parameters over the trailing window_s seconds, warm-starting from the
// previous snapshot. Failed fits keep the previous snapshot in force.
std::vector<ParamSnapshot> live_supervise(const CostContext& full_run,
                                          const ParamVector& p0,
                                          double interval_s, double window_s,
                                          const NewtonConfig& cfg,
                                          SnapshotBox* box = nullptr);

}  // namespace tilt
