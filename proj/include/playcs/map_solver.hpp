// Solver for the per-slot MAP subproblem
//
//   min_x  ||y - A x||^2_Rinv
//        + gamma * (x - p)_T^H  Wq  (x - p)_T
//        + sum_{i in T^c} w_i |x_i - p_i|
//
// where ||z||^2_R = z^H R z, p is the one-step prediction, T the current
// support, Wq the (regularized) inverse of the predicted covariance
// restricted to T and w the per-coordinate l1 weights on T^c.
//
// The smooth part is quadratic and the nonsmooth part has a closed-form
// complex soft-threshold prox, so the solver is a monotone accelerated
// proximal gradient: the accelerated candidate is accepted only if it
// does not increase the objective, otherwise a plain descent step from
// the previous iterate is taken. Backtracking guards the power-iteration
// step size.
#pragma once

#include <functional>
#include <utility>

#include "playcs/types.hpp"

namespace playcs {

// l1 weights above this are treated as "freeze at the prediction".
inline constexpr double kWeightClip = 1e12;

struct MapProblem {
  CVec y;
  CMat A;
  CMat Rinv;           // Hermitian PD, M x M
  SupportSet support;  // T
  CVec pred;           // x_{t|t-1}
  double gamma = 0.0;
  CMat quad_weight;    // |T| x |T|, Hermitian PSD
  RVec l1_weights;     // over T^c in increasing index order, all > 0

  int n() const { return static_cast<int>(A.cols()); }
  int m() const { return static_cast<int>(A.rows()); }
};

struct SolverOptions {
  int max_iters = 2000;
  double rel_tol = 1e-8;   // on successive-iterate relative change
  double kkt_tol = 1e-6;
  double backtrack_factor = 0.5;
  // Observer called with (iteration, objective) after each accepted iterate.
  std::function<void(int, double)> on_iteration;
};

struct SolverReport {
  int iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

// Throws std::invalid_argument when the problem violates its invariants.
void validate_problem(const MapProblem& p);

double objective(const MapProblem& p, const CVec& x);

// Gradient of the two quadratic terms in the Wirtinger convention
// (steepest-ascent direction of the real objective): 2 A^H Rinv (A x - y)
// plus 2 gamma Wq (x - p)_T embedded at T. Zero contribution from the l1 term.
CVec smooth_gradient(const MapProblem& p, const CVec& x);

// Complex soft-threshold toward the prediction: identity on T, and
// p_i + shrink(v_i - p_i, step * w_i) on T^c.
CVec prox_shifted_weighted_l1(const CVec& v, const MapProblem& p, double step);

// shrink(z, tau) = z * max(|z| - tau, 0) / |z|, and 0 at z = 0.
inline cplx shrink(cplx z, double tau) {
  const double mag = std::abs(z);
  if (mag <= tau) return cplx(0.0, 0.0);
  return z * ((mag - tau) / mag);
}

// Upper bound on the Lipschitz constant of the smooth gradient: 30 power
// iterations on v -> 2 (A^H Rinv A v + gamma Wq v_T), inflated by 1.1.
// Returns 1 for the zero operator.
double lipschitz_estimate(const MapProblem& p);

// First-order optimality residual (0 at a minimizer):
//   i in T:                      |g_i|
//   i in T^c, x_i != p_i:        |g_i + w_i (x_i - p_i)/|x_i - p_i||
//   i in T^c, x_i == p_i:        max(|g_i| - w_i, 0)
double optimality_residual(const MapProblem& p, const CVec& x);

std::pair<CVec, SolverReport> solve_map(const MapProblem& p, const SolverOptions& opts,
                                        const CVec& x0);

// Warm-starts from p.pred.
std::pair<CVec, SolverReport> solve_map(const MapProblem& p, const SolverOptions& opts = {});

}  // namespace playcs
