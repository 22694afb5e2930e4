#include "playcs/kalman.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>

namespace playcs {

void symmetrize(CMat& m) { m = ((m + m.adjoint()) * 0.5).eval(); }

double hermitian_residual(const CMat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void clamp_psd(CMat& m, double tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");
  RVec evals = es.eigenvalues();
  bool dirty = false;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < -tol)
      throw numerical_error("covariance indefinite: eigenvalue " + std::to_string(evals[i]));
    if (evals[i] < 0.0) {
      evals[i] = 0.0;
      dirty = true;
    }
  }
  if (dirty) {
    m = es.eigenvectors() * evals.asDiagonal().toDenseMatrix().cast<cplx>() *
        es.eigenvectors().adjoint();
    symmetrize(m);
  }
}

GaussianBelief predict(const GaussianBelief& belief, const DynamicsModel& dyn) {
  const int n = belief.dim();
  if (dyn.F.rows() != n || dyn.F.cols() != n || dyn.Q.rows() != n || dyn.Q.cols() != n ||
      belief.cov.rows() != n || belief.cov.cols() != n)
    throw std::invalid_argument("predict: dimension mismatch");

  GaussianBelief out;
  out.mean = dyn.F * belief.mean;
  out.cov = dyn.F * belief.cov * dyn.F.adjoint() + dyn.Q;
  symmetrize(out.cov);
  return out;
}

GaussianBelief kf_update(const GaussianBelief& pred, const CVec& y,
                         const MeasurementModel& meas) {
  const int n = pred.dim();
  const int m = meas.m();
  if (meas.n() != n || y.size() != m || meas.R.rows() != m || meas.R.cols() != m)
    throw std::invalid_argument("kf_update: dimension mismatch");

  // Innovation covariance S = A P A^H + R (Hermitian).
  const CMat AP = meas.A * pred.cov;
  CMat S = AP * meas.A.adjoint() + meas.R;
  symmetrize(S);

  Eigen::SelfAdjointEigenSolver<CMat> es(S);
  if (es.info() != Eigen::Success) throw numerical_error("kf_update: eigendecomposition failed");
  const double smax = es.eigenvalues().maxCoeff();
  const double smin = es.eigenvalues().minCoeff();
  if (smin <= 0.0 || smax <= 0.0)
    throw numerical_error("kf_update: singular innovation covariance");
  if (smax / smin > 1e12)
    std::fprintf(stderr, "playcs: warning: innovation covariance condition %.3e\n", smax / smin);

  // K = P A^H S^-1 via Hermitian factorization (no explicit inverse).
  const CMat K = S.ldlt().solve(AP).adjoint();

  GaussianBelief out;
  out.mean = pred.mean + K * (y - meas.A * pred.mean);
  out.cov = (CMat::Identity(n, n) - K * meas.A) * pred.cov;
  symmetrize(out.cov);
  clamp_psd(out.cov);
  return out;
}

SupportSet estimate_support(const CVec& x, double threshold, ThresholdMode mode) {
  if (threshold <= 0.0) throw std::invalid_argument("estimate_support: threshold must be positive");
  if (x.size() == 0) return SupportSet::empty(0);
  double cut = threshold;
  if (mode == ThresholdMode::Relative) cut = threshold * x.cwiseAbs().maxCoeff();
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > cut) idx.push_back(static_cast<int>(i));
  return SupportSet(std::move(idx), static_cast<int>(x.size()));
}

}  // namespace playcs
