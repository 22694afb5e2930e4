// Recursive trackers built on the shared Kalman prediction and MAP solver:
// the partial-Laplacian tracker with externally supplied l1 weights, its
// EM variant that learns the weights from an LSM hyperprior, the classic
// baselines (regular/modified/regularized-modified CS, dynamic reweighted
// l1, plain Kalman) and the reduced-KF-plus-detection scheme.
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "playcs/kalman.hpp"
#include "playcs/map_solver.hpp"
#include "playcs/signal_gen.hpp"
#include "playcs/types.hpp"

namespace playcs {

enum class TrackerKind {
  PlayCs,
  PlayPlusCs,
  KalmanFilter,
  RegularCs,
  ModifiedCs,
  RegModCs,
  WeightedL1Df,
  KfCs,
};

const char* to_string(TrackerKind k);
std::optional<TrackerKind> tracker_kind_from_string(std::string_view s);

struct TrackerParams {
  TrackerKind kind = TrackerKind::PlayPlusCs;
  double gamma = 1.0;
  double alpha = 0.05;
  ThresholdMode alpha_mode = ThresholdMode::Absolute;
  LsmPrior lsm{1.0, 0.05};
  // Global l1 scale for the baselines (and the constant-weight tracker in
  // run_sequence). Unset means the per-slot default 0.01 * max|A^H y|.
  std::optional<double> lambda;
  int em_iters = 5;
  double em_tol = 1e-6;
  double rwl1_epsilon = 1e-3;
  double sigma_f = 0.01;  // process noise std (Q = sigma_f^2 I)
  double sigma_m = 0.01;  // measurement noise std; steps substitute
                          // R = sigma_m^2 I when the model has an empty R
  SolverOptions solver;
};

void validate(const TrackerParams& params);

struct TrackerState {
  GaussianBelief belief;
  SupportSet support;
  int slot = 0;
};

// mean = 0, cov = I, empty support, slot 0.
TrackerState init_state(int n);

// Per-slot l1 scale: params.lambda, or 0.01 * max|A^H y| when unset.
double resolve_lambda(const TrackerParams& params, const CMat& a, const CVec& y);

// One slot of the partial-Laplacian tracker; weights cover T^c of the
// incoming state's support in increasing index order.
TrackerState step_play_cs(const TrackerState& state, const CVec& y,
                          const MeasurementModel& meas, const DynamicsModel& dyn,
                          const TrackerParams& params, const RVec& weights);

// Posterior-mean inverse scales w_i = (a+1)/(b + |(x - pred)_i|) over the
// given coordinates, clipped at kWeightClip.
RVec em_weights(const CVec& x, const CVec& pred, const std::vector<int>& tcomp,
                const LsmPrior& prior);

// EM iterates recorded for diagnostics: iterates[0] is the initial point
// (the prediction) and weights[k] drove the step producing iterates[k+1].
struct EmTrace {
  std::vector<CVec> iterates;
  std::vector<RVec> weights;
};

TrackerState step_play_plus_cs(const TrackerState& state, const CVec& y,
                               const MeasurementModel& meas, const DynamicsModel& dyn,
                               const TrackerParams& params, EmTrace* trace = nullptr);

// kind must be one of RegularCs, ModifiedCs, RegModCs, WeightedL1Df,
// KalmanFilter.
TrackerState step_baseline(TrackerKind kind, const TrackerState& state, const CVec& y,
                           const MeasurementModel& meas, const DynamicsModel& dyn,
                           const TrackerParams& params);

// Reduced Kalman update on T followed by l1 addition detection on the
// T-residual over the T^c columns; detections join the support.
TrackerState step_kf_cs(const TrackerState& state, const CVec& y,
                        const MeasurementModel& meas, const DynamicsModel& dyn,
                        const TrackerParams& params);

// Dispatch on params.kind. PlayCs uses constant weights resolve_lambda(...).
TrackerState step_tracker(const TrackerState& state, const CVec& y,
                          const MeasurementModel& meas, const DynamicsModel& dyn,
                          const TrackerParams& params);

// Folds step_tracker over the dataset from init_state; F = I and
// Q = sigma_f^2 I; returns every per-slot estimate.
std::vector<CVec> run_sequence(TrackerKind kind, const SequenceDataset& dataset,
                               const TrackerParams& params);

}  // namespace playcs
