// Complex-valued Kalman recursion primitives shared by all trackers.
//
// Prediction:  x_pred = F x,          P_pred = F P F^H + Q
// Update:      K = P A^H (A P A^H + R)^-1
//              x = x_pred + K (y - A x_pred)
//              P = (I - K A) P_pred
#pragma once

#include "playcs/types.hpp"

namespace playcs {

// Replace M by (M + M^H)/2 in place.
void symmetrize(CMat& m);

// Max |M - M^H| entry.
double hermitian_residual(const CMat& m);

// Project a symmetrized matrix onto the PSD cone: eigenvalues in
// [-tol, 0] are clamped to 0, anything below -tol throws numerical_error.
void clamp_psd(CMat& m, double tol = 1e-10);

GaussianBelief predict(const GaussianBelief& belief, const DynamicsModel& dyn);

GaussianBelief kf_update(const GaussianBelief& pred, const CVec& y,
                         const MeasurementModel& meas);

enum class ThresholdMode { Absolute, Relative };

// T = {i : |x_i| > threshold} (absolute) or > threshold * max_i |x_i| (relative).
SupportSet estimate_support(const CVec& x, double threshold,
                            ThresholdMode mode = ThresholdMode::Absolute);

}  // namespace playcs
