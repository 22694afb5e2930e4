#include "playcs/trackers.hpp"

#include <cmath>

namespace playcs {

const char* to_string(TrackerKind k) {
  switch (k) {
    case TrackerKind::PlayCs: return "play-cs";
    case TrackerKind::PlayPlusCs: return "play-plus-cs";
    case TrackerKind::KalmanFilter: return "kalman-filter";
    case TrackerKind::RegularCs: return "regular-cs";
    case TrackerKind::ModifiedCs: return "modified-cs";
    case TrackerKind::RegModCs: return "reg-mod-cs";
    case TrackerKind::WeightedL1Df: return "weighted-l1-df";
    case TrackerKind::KfCs: return "kf-cs";
  }
  return "?";
}

std::optional<TrackerKind> tracker_kind_from_string(std::string_view s) {
  for (TrackerKind k :
       {TrackerKind::PlayCs, TrackerKind::PlayPlusCs, TrackerKind::KalmanFilter,
        TrackerKind::RegularCs, TrackerKind::ModifiedCs, TrackerKind::RegModCs,
        TrackerKind::WeightedL1Df, TrackerKind::KfCs})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

void validate(const TrackerParams& params) {
  if (params.gamma < 0.0) throw std::invalid_argument("params: gamma must be nonnegative");
  if (params.alpha <= 0.0) throw std::invalid_argument("params: alpha must be positive");
  if (!params.lsm.valid()) throw std::invalid_argument("params: LSM prior needs a > 0, b > 0");
  if (params.lambda && *params.lambda <= 0.0)
    throw std::invalid_argument("params: lambda must be positive");
  if (params.em_iters < 1) throw std::invalid_argument("params: em_iters must be >= 1");
  if (params.em_tol <= 0.0) throw std::invalid_argument("params: em_tol must be positive");
  if (params.rwl1_epsilon <= 0.0)
    throw std::invalid_argument("params: rwl1_epsilon must be positive");
  if (params.sigma_f <= 0.0 || params.sigma_m <= 0.0)
    throw std::invalid_argument("params: noise stds must be positive");
}

TrackerState init_state(int n) {
  if (n < 1) throw std::invalid_argument("init_state: n must be >= 1");
  TrackerState s;
  s.belief.mean = CVec::Zero(n);
  s.belief.cov = CMat::Identity(n, n);
  s.support = SupportSet::empty(n);
  s.slot = 0;
  return s;
}

double resolve_lambda(const TrackerParams& params, const CMat& a, const CVec& y) {
  if (params.lambda) return *params.lambda;
  const double scale = (a.adjoint() * y).cwiseAbs().maxCoeff();
  return std::max(0.01 * scale, 1e-12);
}

namespace {

CMat hermitian_inverse(const CMat& m) {
  return m.ldlt().solve(CMat::Identity(m.rows(), m.cols()));
}

// Inverse of the predicted covariance restricted to T, regularized against
// near-singular restrictions.
CMat quad_weight_for(const CMat& p_pred, const SupportSet& support) {
  const auto& idx = support.indices();
  const Eigen::Index t = static_cast<Eigen::Index>(idx.size());
  CMat block(t, t);
  for (Eigen::Index r = 0; r < t; ++r)
    for (Eigen::Index c = 0; c < t; ++c)
      block(r, c) = p_pred(idx[static_cast<size_t>(r)], idx[static_cast<size_t>(c)]);
  block += 1e-8 * CMat::Identity(t, t);
  CMat inv = hermitian_inverse(block);
  symmetrize(inv);
  return inv;
}

// P_t = (I - K A) P_pred with K from the Kalman gain formula.
CMat kalman_posterior_cov(const CMat& p_pred, const MeasurementModel& meas) {
  const CMat ap = meas.A * p_pred;
  CMat s = ap * meas.A.adjoint() + meas.R;
  symmetrize(s);
  const CMat k = s.ldlt().solve(ap).adjoint();
  CMat post = (CMat::Identity(p_pred.rows(), p_pred.cols()) - k * meas.A) * p_pred;
  symmetrize(post);
  clamp_psd(post);
  return post;
}

TrackerState finish_step(const TrackerState& state, CVec xhat, CMat cov,
                         const TrackerParams& params) {
  TrackerState out;
  out.support = estimate_support(xhat, params.alpha, params.alpha_mode);
  out.belief.mean = std::move(xhat);
  out.belief.cov = std::move(cov);
  out.slot = state.slot + 1;
  return out;
}

// A model without a noise covariance falls back to R = sigma_m^2 I.
MeasurementModel with_noise(const MeasurementModel& meas, const TrackerParams& params) {
  if (meas.R.rows() != 0) return meas;
  MeasurementModel out = meas;
  out.R = params.sigma_m * params.sigma_m * CMat::Identity(meas.m(), meas.m());
  return out;
}

MapProblem base_problem(const CVec& y, const MeasurementModel& meas) {
  MapProblem p;
  p.y = y;
  p.A = meas.A;
  return p;
}

}  // namespace

TrackerState step_play_cs(const TrackerState& state, const CVec& y,
                          const MeasurementModel& meas, const DynamicsModel& dyn,
                          const TrackerParams& params, const RVec& weights) {
  validate(params);
  const MeasurementModel model = with_noise(meas, params);
  const GaussianBelief pred = predict(state.belief, dyn);

  MapProblem p = base_problem(y, model);
  p.Rinv = hermitian_inverse(model.R);
  p.support = state.support;
  p.pred = pred.mean;
  p.gamma = params.gamma;
  p.quad_weight = quad_weight_for(pred.cov, state.support);
  p.l1_weights = weights;

  auto [xhat, report] = solve_map(p, params.solver);
  (void)report;
  return finish_step(state, std::move(xhat), kalman_posterior_cov(pred.cov, model), params);
}

RVec em_weights(const CVec& x, const CVec& pred, const std::vector<int>& tcomp,
                const LsmPrior& prior) {
  if (!prior.valid()) throw std::invalid_argument("em_weights: invalid LSM prior");
  RVec w(static_cast<Eigen::Index>(tcomp.size()));
  for (size_t k = 0; k < tcomp.size(); ++k) {
    const double innovation = std::abs(x[tcomp[k]] - pred[tcomp[k]]);
    w[static_cast<Eigen::Index>(k)] =
        std::min((prior.a + 1.0) / (prior.b + innovation), kWeightClip);
  }
  return w;
}

TrackerState step_play_plus_cs(const TrackerState& state, const CVec& y,
                               const MeasurementModel& meas, const DynamicsModel& dyn,
                               const TrackerParams& params, EmTrace* trace) {
  validate(params);
  const MeasurementModel model = with_noise(meas, params);
  const GaussianBelief pred = predict(state.belief, dyn);
  const auto tcomp = state.support.complement().indices();

  MapProblem p = base_problem(y, model);
  p.Rinv = hermitian_inverse(model.R);
  p.support = state.support;
  p.pred = pred.mean;
  p.gamma = params.gamma;
  p.quad_weight = quad_weight_for(pred.cov, state.support);

  CVec xk = pred.mean;
  if (trace) trace->iterates.push_back(xk);
  for (int k = 0; k < params.em_iters; ++k) {
    p.l1_weights = em_weights(xk, pred.mean, tcomp, params.lsm);
    auto [xnext, report] = solve_map(p, params.solver, xk);
    (void)report;
    const double rel = (xnext - xk).norm() / std::max(xk.norm(), 1e-12);
    xk = std::move(xnext);
    if (trace) {
      trace->weights.push_back(p.l1_weights);
      trace->iterates.push_back(xk);
    }
    if (rel < params.em_tol) break;
  }
  return finish_step(state, std::move(xk), kalman_posterior_cov(pred.cov, model), params);
}

TrackerState step_baseline(TrackerKind kind, const TrackerState& state, const CVec& y,
                           const MeasurementModel& meas, const DynamicsModel& dyn,
                           const TrackerParams& params) {
  validate(params);
  const MeasurementModel model = with_noise(meas, params);
  const GaussianBelief pred = predict(state.belief, dyn);
  const int n = model.n();
  const int m = model.m();

  if (kind == TrackerKind::KalmanFilter) {
    GaussianBelief post = kf_update(pred, y, model);
    return finish_step(state, std::move(post.mean), std::move(post.cov), params);
  }

  const double lambda = resolve_lambda(params, model.A, y);
  MapProblem p = base_problem(y, model);
  p.Rinv = CMat::Identity(m, m);  // these objectives use the plain residual norm

  switch (kind) {
    case TrackerKind::RegularCs:
      p.support = SupportSet::empty(n);
      p.pred = CVec::Zero(n);
      p.l1_weights = RVec::Constant(n, lambda);
      break;
    case TrackerKind::ModifiedCs:
      p.support = state.support;
      p.pred = CVec::Zero(n);
      p.quad_weight = CMat::Zero(state.support.size(), state.support.size());
      p.l1_weights = RVec::Constant(n - state.support.size(), lambda);
      break;
    case TrackerKind::RegModCs: {
      p.support = state.support;
      p.pred = CVec::Zero(n);
      for (int i : state.support.indices()) p.pred[i] = pred.mean[i];
      p.gamma = params.gamma;
      p.quad_weight = CMat::Identity(state.support.size(), state.support.size());
      p.l1_weights = RVec::Constant(n - state.support.size(), lambda);
      break;
    }
    case TrackerKind::WeightedL1Df: {
      p.support = SupportSet::empty(n);
      p.pred = CVec::Zero(n);
      RVec w(n);
      for (int i = 0; i < n; ++i)
        w[i] = lambda / (params.rwl1_epsilon + std::abs(pred.mean[i]));
      p.l1_weights = std::move(w);
      break;
    }
    default:
      throw std::invalid_argument("step_baseline: kind has a dedicated step function");
  }

  auto [xhat, report] = solve_map(p, params.solver);
  (void)report;
  return finish_step(state, std::move(xhat), kalman_posterior_cov(pred.cov, model), params);
}

TrackerState step_kf_cs(const TrackerState& state, const CVec& y,
                        const MeasurementModel& meas, const DynamicsModel& dyn,
                        const TrackerParams& params) {
  validate(params);
  const MeasurementModel model = with_noise(meas, params);
  const GaussianBelief pred = predict(state.belief, dyn);
  const int n = model.n();
  const int m = model.m();
  const auto& tidx = state.support.indices();
  const auto comp = state.support.complement().indices();

  CVec xhat = CVec::Zero(n);
  CMat cov = pred.cov;

  // (1) Reduced Kalman update on the support coordinates.
  if (!tidx.empty()) {
    const Eigen::Index t = static_cast<Eigen::Index>(tidx.size());
    MeasurementModel sub;
    sub.A.resize(m, t);
    for (Eigen::Index c = 0; c < t; ++c) sub.A.col(c) = model.A.col(tidx[static_cast<size_t>(c)]);
    sub.R = model.R;
    GaussianBelief prior;
    prior.mean.resize(t);
    prior.cov.resize(t, t);
    for (Eigen::Index r = 0; r < t; ++r) {
      prior.mean[r] = pred.mean[tidx[static_cast<size_t>(r)]];
      for (Eigen::Index c = 0; c < t; ++c)
        prior.cov(r, c) = pred.cov(tidx[static_cast<size_t>(r)], tidx[static_cast<size_t>(c)]);
    }
    const GaussianBelief post = kf_update(prior, y, sub);
    for (Eigen::Index r = 0; r < t; ++r) {
      xhat[tidx[static_cast<size_t>(r)]] = post.mean[r];
      for (Eigen::Index c = 0; c < t; ++c)
        cov(tidx[static_cast<size_t>(r)], tidx[static_cast<size_t>(c)]) = post.cov(r, c);
    }
    // Support and off-support blocks are modeled as independent.
    for (int r : tidx)
      for (int c : comp) {
        cov(r, c) = cplx(0.0, 0.0);
        cov(c, r) = cplx(0.0, 0.0);
      }
  }

  // (2) l1 addition detection on the support residual over T^c columns.
  if (!comp.empty()) {
    CVec residual = y;
    for (int i : tidx) residual -= model.A.col(i) * xhat[i];

    MapProblem det;
    det.y = residual;
    det.A.resize(m, static_cast<Eigen::Index>(comp.size()));
    for (size_t k = 0; k < comp.size(); ++k)
      det.A.col(static_cast<Eigen::Index>(k)) = model.A.col(comp[k]);
    det.Rinv = CMat::Identity(m, m);
    det.support = SupportSet::empty(static_cast<int>(comp.size()));
    det.pred = CVec::Zero(static_cast<Eigen::Index>(comp.size()));
    det.l1_weights = RVec::Constant(static_cast<Eigen::Index>(comp.size()),
                                    resolve_lambda(params, model.A, y));
    auto [beta, report] = solve_map(det, params.solver);
    (void)report;
    for (size_t k = 0; k < comp.size(); ++k) xhat[comp[k]] = beta[static_cast<Eigen::Index>(k)];
  }

  symmetrize(cov);
  clamp_psd(cov);

  // Detected additions merge into the carried support.
  CVec off = CVec::Zero(n);
  for (int i : comp) off[i] = xhat[i];
  const SupportSet detected = estimate_support(off, params.alpha, params.alpha_mode);
  std::vector<int> merged = tidx;
  for (int i : detected.indices())
    merged.insert(std::lower_bound(merged.begin(), merged.end(), i), i);

  TrackerState out;
  out.belief.mean = std::move(xhat);
  out.belief.cov = std::move(cov);
  out.support = SupportSet(std::move(merged), n);
  out.slot = state.slot + 1;
  return out;
}

TrackerState step_tracker(const TrackerState& state, const CVec& y,
                          const MeasurementModel& meas, const DynamicsModel& dyn,
                          const TrackerParams& params) {
  switch (params.kind) {
    case TrackerKind::PlayCs: {
      const RVec w = RVec::Constant(meas.n() - state.support.size(),
                                    resolve_lambda(params, meas.A, y));
      return step_play_cs(state, y, meas, dyn, params, w);
    }
    case TrackerKind::PlayPlusCs:
      return step_play_plus_cs(state, y, meas, dyn, params);
    case TrackerKind::KfCs:
      return step_kf_cs(state, y, meas, dyn, params);
    default:
      return step_baseline(params.kind, state, y, meas, dyn, params);
  }
}

std::vector<CVec> run_sequence(TrackerKind kind, const SequenceDataset& dataset,
                               const TrackerParams& params) {
  if (dataset.slots() < 1) throw std::invalid_argument("run_sequence: empty dataset");
  TrackerParams effective = params;
  effective.kind = kind;
  validate(effective);

  const int n = dataset.spec.n;
  const DynamicsModel dyn = DynamicsModel::random_walk(n, effective.sigma_f * effective.sigma_f);
  TrackerState state = init_state(n);

  std::vector<CVec> estimates;
  estimates.reserve(static_cast<size_t>(dataset.slots()));
  for (int t = 0; t < dataset.slots(); ++t) {
    try {
      state = step_tracker(state, dataset.observations[static_cast<size_t>(t)],
                           dataset.operators[static_cast<size_t>(t)], dyn, effective);
    } catch (const std::exception& e) {
      throw numerical_error("slot " + std::to_string(t + 1) + ": " + e.what());
    }
    estimates.push_back(state.belief.mean);
  }
  return estimates;
}

}  // namespace playcs
