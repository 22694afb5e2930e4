#include <doctest.h>

#include "oracles.hpp"
#include "playcs/trackers.hpp"

using namespace playcs;
using namespace playcs::testing;

namespace {

TrackerParams tight_params() {
  TrackerParams p;
  p.solver.max_iters = 20000;
  p.solver.rel_tol = 1e-12;
  return p;
}

MeasurementModel random_meas(Rng& rng, int m, int n, double noise_var) {
  return MeasurementModel::isotropic(random_cmat(rng, m, n), noise_var);
}

}  // namespace

TEST_CASE("init_state: zero mean, identity covariance, empty support") {
  const TrackerState s = init_state(4);
  CHECK(s.belief.mean.size() == 4);
  CHECK(s.belief.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.belief.cov - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.support.size() == 0);
  CHECK(s.slot == 0);

  const TrackerState scalar = init_state(1);
  CHECK(scalar.belief.mean.size() == 1);

  const TrackerState again = init_state(4);
  CHECK((again.belief.mean - s.belief.mean).norm() == 0.0);
  CHECK_THROWS_AS(init_state(0), std::invalid_argument);
}

TEST_CASE("step_play_cs with full support and gamma = 1 is a Kalman step") {
  Rng rng(61);
  const int n = 6;
  const int m = 4;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = random_hpd(rng, n);
  state.support = SupportSet::full(n);

  const MeasurementModel meas = random_meas(rng, m, n, 0.05);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  params.gamma = 1.0;

  const TrackerState out = step_play_cs(state, y, meas, dyn, params, RVec(0));
  const GaussianBelief kf = kf_update(predict(state.belief, dyn), y, meas);
  CHECK((out.belief.mean - kf.mean).norm() / kf.mean.norm() < 1e-6);
  CHECK((out.belief.cov - kf.cov).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(out.slot == 1);
}

TEST_CASE("step_play_cs: dominant data term pins the estimate to A^-1 y") {
  Rng rng(67);
  const int n = 4;
  const TrackerState state = init_state(n);
  const CMat a = random_cmat(rng, n, n) + 2.0 * CMat::Identity(n, n);
  const MeasurementModel meas = MeasurementModel::isotropic(a, 1e-12);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, n);

  TrackerParams params = tight_params();
  params.solver.max_iters = 50000;
  const RVec weights = RVec::Constant(n, 1e-8);

  const TrackerState out = step_play_cs(state, y, meas, dyn, params, weights);
  const CVec direct = a.fullPivLu().solve(y);
  CHECK((out.belief.mean - direct).norm() / direct.norm() < 1e-6);
}

TEST_CASE("step_play_cs agrees with a straight-line transliteration over 10 slots") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SyntheticSparse;
  spec.n = 16;
  spec.m = 8;
  spec.slots = 10;
  spec.sparsity = 4;
  spec.snr_db = 25.0;
  spec.seed = 404;
  const SequenceDataset ds = generate(spec);

  TrackerParams params = tight_params();
  params.gamma = 0.8;
  params.alpha = 0.15;
  const double lambda = 0.4;
  const int n = spec.n;

  // library fold
  const DynamicsModel dyn = DynamicsModel::random_walk(n, params.sigma_f * params.sigma_f);
  TrackerState state = init_state(n);
  std::vector<CVec> lib;
  for (int t = 0; t < spec.slots; ++t) {
    const RVec w = RVec::Constant(n - state.support.size(), lambda);
    state = step_play_cs(state, ds.observations[t], ds.operators[t], dyn, params, w);
    lib.push_back(state.belief.mean);
  }

  // reference: the recursion written out directly (Hermitian solves, as in
  // the library, so the comparison isolates the orchestration)
  CVec xhat = CVec::Zero(n);
  CMat p = CMat::Identity(n, n);
  SupportSet support = SupportSet::empty(n);
  for (int t = 0; t < spec.slots; ++t) {
    const CMat& a = ds.operators[t].A;
    const CMat& r = ds.operators[t].R;
    const CVec xp = dyn.F * xhat;
    CMat pp = dyn.F * p * dyn.F.adjoint() + dyn.Q;
    pp = ((pp + pp.adjoint()) * 0.5).eval();

    MapProblem prob;
    prob.y = ds.observations[t];
    prob.A = a;
    prob.Rinv = r.ldlt().solve(CMat::Identity(spec.m, spec.m));
    prob.support = support;
    prob.pred = xp;
    prob.gamma = params.gamma;
    const auto& tidx = support.indices();
    CMat block(support.size(), support.size());
    for (int rr = 0; rr < support.size(); ++rr)
      for (int cc = 0; cc < support.size(); ++cc)
        block(rr, cc) = pp(tidx[static_cast<size_t>(rr)], tidx[static_cast<size_t>(cc)]);
    block += 1e-8 * CMat::Identity(support.size(), support.size());
    CMat qw = block.ldlt().solve(CMat::Identity(support.size(), support.size()));
    qw = ((qw + qw.adjoint()) * 0.5).eval();
    prob.quad_weight = qw;
    prob.l1_weights = RVec::Constant(n - support.size(), lambda);
    xhat = solve_map(prob, params.solver).first;

    const CMat ap = a * pp;
    CMat s = ap * a.adjoint() + r;
    s = ((s + s.adjoint()) * 0.5).eval();
    const CMat k = s.ldlt().solve(ap).adjoint();
    p = (CMat::Identity(n, n) - k * a) * pp;
    p = ((p + p.adjoint()) * 0.5).eval();
    support = estimate_support(xhat, params.alpha);

    CHECK((xhat - lib[static_cast<size_t>(t)]).norm() /
              std::max(1.0, lib[static_cast<size_t>(t)].norm()) <
          1e-9);
  }
}

TEST_CASE("em_weights: direct substitutions and monotonicity") {
  const LsmPrior prior{1.0, 1.0};
  CVec x(3);
  CVec pred(3);
  pred.setZero();
  x << cplx(0, 0), cplx(1, 0), cplx(0, 3);
  const RVec w = em_weights(x, pred, {0, 1, 2}, prior);
  CHECK(w[0] == doctest::Approx(2.0));  // innovation 0 -> (a+1)/b
  CHECK(w[1] == doctest::Approx(1.0));  // innovation 1 -> (a+1)/(b+1)
  CHECK(w[2] == doctest::Approx(0.5));  // innovation 3 -> strictly smaller
  CHECK(w[0] > w[1]);
  CHECK(w[1] > w[2]);
}

TEST_CASE("em_weights: positive and phase invariant") {
  Rng rng(71);
  const LsmPrior prior{2.0, 0.3};
  const CVec pred = random_cvec(rng, 8);
  const CVec x = pred + random_cvec(rng, 8);
  std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
  const RVec w = em_weights(x, pred, all, prior);
  for (int i = 0; i < 8; ++i) CHECK(w[i] > 0.0);

  const cplx phase = std::polar(1.0, 1.234);
  const CVec rotated = pred + phase * (x - pred);
  const RVec w2 = em_weights(rotated, pred, all, prior);
  CHECK((w - w2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("step_play_plus_cs with one EM pass equals step_play_cs at the prior weights") {
  Rng rng(73);
  const int n = 8;
  const int m = 5;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = random_hpd(rng, n);
  state.support = random_support(rng, n, 3);

  const MeasurementModel meas = random_meas(rng, m, n, 0.02);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  params.em_iters = 1;
  params.lsm = LsmPrior{1.5, 0.4};

  const TrackerState em = step_play_plus_cs(state, y, meas, dyn, params);
  // the first E step sees zero innovation, so every weight is (a+1)/b
  const RVec w = RVec::Constant(n - state.support.size(),
                                (params.lsm.a + 1.0) / params.lsm.b);
  const TrackerState direct = step_play_cs(state, y, meas, dyn, params, w);
  CHECK((em.belief.mean - direct.belief.mean).norm() == 0.0);
}

TEST_CASE("EM iterations never increase the majorize-minimize objective") {
  for (uint64_t seed = 80; seed < 86; ++seed) {
    Rng rng(seed);
    const int n = 10;
    const int m = 6;
    TrackerState state = init_state(n);
    state.belief.mean = random_cvec(rng, n);
    state.belief.cov = random_hpd(rng, n);
    state.support = random_support(rng, n, 3);

    const MeasurementModel meas = random_meas(rng, m, n, 0.05);
    const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
    const CVec y = meas.A * (state.belief.mean + 0.3 * random_cvec(rng, n)) +
                   0.05 * random_cvec(rng, m);

    TrackerParams params = tight_params();
    params.em_iters = 6;
    params.em_tol = 1e-12;
    params.lsm = LsmPrior{1.0, 0.2};

    EmTrace trace;
    step_play_plus_cs(state, y, meas, dyn, params, &trace);
    REQUIRE(trace.iterates.size() >= 2);

    // rebuild the subproblem exactly as the step does
    const GaussianBelief pred = predict(state.belief, dyn);
    MapProblem p;
    p.y = y;
    p.A = meas.A;
    p.Rinv = meas.R.inverse();
    p.support = state.support;
    p.pred = pred.mean;
    p.gamma = params.gamma;
    const auto& tidx = state.support.indices();
    CMat block(state.support.size(), state.support.size());
    for (int rr = 0; rr < state.support.size(); ++rr)
      for (int cc = 0; cc < state.support.size(); ++cc)
        block(rr, cc) = pred.cov(tidx[static_cast<size_t>(rr)], tidx[static_cast<size_t>(cc)]);
    p.quad_weight =
        (block + 1e-8 * CMat::Identity(state.support.size(), state.support.size())).inverse();
    p.l1_weights = RVec::Ones(n - state.support.size());

    for (size_t k = 1; k < trace.iterates.size(); ++k)
      CHECK(mm_objective(p, params.lsm, trace.iterates[k]) <=
            mm_objective(p, params.lsm, trace.iterates[k - 1]) + 1e-8);
  }
}

TEST_CASE("EM weights localize a 1-sparse innovation") {
  Rng rng(91);
  const int n = 12;
  const int m = 8;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = 0.01 * CMat::Identity(n, n);
  state.support = SupportSet({0, 1, 2, 3}, n);

  const int spike_at = 7;  // in T^c
  CVec truth = state.belief.mean;
  truth[spike_at] += cplx(2.0, 1.0);

  const MeasurementModel meas = random_meas(rng, m, n, 1e-6);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 1e-6);
  const CVec y = meas.A * truth;

  TrackerParams params = tight_params();
  params.lsm = LsmPrior{1.0, 0.05};
  params.em_iters = 5;

  EmTrace trace;
  step_play_plus_cs(state, y, meas, dyn, params, &trace);
  REQUIRE(!trace.weights.empty());
  const RVec& final_w = trace.weights.back();

  const auto comp = state.support.complement().indices();
  int best = -1;
  double best_w = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < comp.size(); ++k) {
    if (final_w[static_cast<Eigen::Index>(k)] < best_w) {
      best_w = final_w[static_cast<Eigen::Index>(k)];
      best = comp[k];
    }
  }
  CHECK(best == spike_at);
}

TEST_CASE("baseline steps match their substituted unified problems") {
  for (uint64_t seed = 120; seed < 123; ++seed) {
    Rng rng(seed);
    const int n = 12;
    const int m = 8;
    TrackerState state = init_state(n);
    state.belief.mean = random_cvec(rng, n);
    state.belief.cov = random_hpd(rng, n);
    state.support = random_support(rng, n, 4);

    const MeasurementModel meas = random_meas(rng, m, n, 0.05);
    const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
    const CVec y = random_cvec(rng, m);

    TrackerParams params = tight_params();
    params.lambda = 1.0;
    params.gamma = 0.7;

    SolverOptions tight;
    tight.max_iters = 50000;
    tight.rel_tol = 1e-13;

    const GaussianBelief pred = predict(state.belief, dyn);
    const int t_size = state.support.size();

    MapProblem sub;
    sub.y = y;
    sub.A = meas.A;
    sub.Rinv = CMat::Identity(m, m);

    SUBCASE("modified: W = I, pred = 0, gamma = 0") {
      sub.support = state.support;
      sub.pred = CVec::Zero(n);
      sub.gamma = 0.0;
      sub.quad_weight = CMat::Zero(t_size, t_size);
      sub.l1_weights = RVec::Ones(n - t_size);
      const CVec x_sub = solve_map(sub, tight).first;
      const CVec x_base =
          step_baseline(TrackerKind::ModifiedCs, state, y, meas, dyn, params).belief.mean;
      CHECK(std::abs(objective(sub, x_sub) - objective(sub, x_base)) < 1e-8);
      CHECK((x_sub - x_base).cwiseAbs().maxCoeff() < 1e-5);
    }

    SUBCASE("reg-mod: W = I, off-support prediction zeroed") {
      sub.support = state.support;
      sub.pred = CVec::Zero(n);
      for (int i : state.support.indices()) sub.pred[i] = pred.mean[i];
      sub.gamma = params.gamma;
      sub.quad_weight = CMat::Identity(t_size, t_size);
      sub.l1_weights = RVec::Ones(n - t_size);
      const CVec x_sub = solve_map(sub, tight).first;
      const CVec x_base =
          step_baseline(TrackerKind::RegModCs, state, y, meas, dyn, params).belief.mean;
      CHECK(std::abs(objective(sub, x_sub) - objective(sub, x_base)) < 1e-8);
      CHECK((x_sub - x_base).cwiseAbs().maxCoeff() < 1e-5);
    }

    SUBCASE("weighted-l1: pred = 0, T empty, prediction-driven weights") {
      sub.support = SupportSet::empty(n);
      sub.pred = CVec::Zero(n);
      RVec w(n);
      for (int i = 0; i < n; ++i)
        w[i] = *params.lambda / (params.rwl1_epsilon + std::abs(pred.mean[i]));
      sub.l1_weights = w;
      const CVec x_sub = solve_map(sub, tight).first;
      const CVec x_base =
          step_baseline(TrackerKind::WeightedL1Df, state, y, meas, dyn, params).belief.mean;
      CHECK(std::abs(objective(sub, x_sub) - objective(sub, x_base)) < 1e-8);
      CHECK((x_sub - x_base).cwiseAbs().maxCoeff() < 1e-5);
    }

    SUBCASE("regular: plain lasso, no support, no prediction") {
      sub.support = SupportSet::empty(n);
      sub.pred = CVec::Zero(n);
      sub.l1_weights = RVec::Constant(n, *params.lambda);
      const CVec x_sub = solve_map(sub, tight).first;
      const CVec x_base =
          step_baseline(TrackerKind::RegularCs, state, y, meas, dyn, params).belief.mean;
      CHECK(std::abs(objective(sub, x_sub) - objective(sub, x_base)) < 1e-8);
      CHECK((x_sub - x_base).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("modified-cs matches a coordinate-descent lasso-on-complement oracle") {
  Rng rng(130);
  const int n = 10;
  const int m = 7;
  TrackerState state = init_state(n);
  state.support = random_support(rng, n, 3);
  const MeasurementModel meas = random_meas(rng, m, n, 0.05);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  params.lambda = 0.6;
  params.solver.max_iters = 50000;
  params.solver.rel_tol = 1e-13;

  const CVec x_base =
      step_baseline(TrackerKind::ModifiedCs, state, y, meas, dyn, params).belief.mean;

  MapProblem p;
  p.y = y;
  p.A = meas.A;
  p.Rinv = CMat::Identity(m, m);
  p.support = state.support;
  p.pred = CVec::Zero(n);
  p.quad_weight = CMat::Zero(3, 3);
  p.l1_weights = RVec::Constant(n - 3, 0.6);
  const CVec oracle = coordinate_descent_map(p, 8000, 1e-14);
  CHECK((x_base - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("known support recovers noiselessly where the plain lasso cannot") {
  // M below the plain-lasso requirement but >= |T|: the support-aware
  // objective still has the truth as its small-lambda minimizer. The tiny
  // final lambda is reached by continuation with warm starts; a cold solve
  // at lambda = 1e-8 just fits the data and never selects.
  for (uint64_t seed : {140, 141}) {
    Rng rng(seed);
    const int n = 32;
    const int m = 7;  // < 2 * sparsity
    const int l = 4;
    const SupportSet truth_support = random_support(rng, n, l);
    CVec truth = CVec::Zero(n);
    for (int i : truth_support.indices())
      truth[i] = rng.cnormal() + cplx(0.5, 0.5);  // bounded away from zero

    const MeasurementModel meas = random_meas(rng, m, n, 1e-4);
    const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
    const CVec y = meas.A * truth;  // noiseless observations

    MapProblem p;
    p.y = y;
    p.A = meas.A;
    p.Rinv = CMat::Identity(m, m);
    p.support = truth_support;
    p.pred = CVec::Zero(n);
    p.quad_weight = CMat::Zero(l, l);
    SolverOptions opts;
    opts.max_iters = 30000;
    opts.rel_tol = 1e-13;
    CVec x_mod = p.pred;
    for (double lam = 0.05; lam >= 1e-8; lam *= 0.2) {
      p.l1_weights = RVec::Constant(n - l, lam);
      x_mod = solve_map(p, opts, x_mod).first;
    }
    CHECK((x_mod - truth).squaredNorm() / truth.squaredNorm() < 1e-8);

    TrackerParams params = tight_params();
    params.lambda = 1e-8;
    params.solver.max_iters = 60000;
    params.solver.rel_tol = 1e-13;
    const CVec x_reg =
        step_baseline(TrackerKind::RegularCs, init_state(n), y, meas, dyn, params).belief.mean;
    CHECK((x_reg - truth).squaredNorm() / truth.squaredNorm() > 0.1);
  }
}

TEST_CASE("weighted-l1 with a zero prediction collapses to regular-cs at lambda/epsilon") {
  Rng rng(150);
  const int n = 9;
  const int m = 6;
  const MeasurementModel meas = random_meas(rng, m, n, 0.05);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, m);

  TrackerParams wparams = tight_params();
  wparams.lambda = 0.02;
  wparams.rwl1_epsilon = 1e-3;

  TrackerParams rparams = tight_params();
  rparams.lambda = 0.02 / 1e-3;

  const TrackerState s0 = init_state(n);  // prediction is exactly zero
  const CVec xw = step_baseline(TrackerKind::WeightedL1Df, s0, y, meas, dyn, wparams).belief.mean;
  const CVec xr = step_baseline(TrackerKind::RegularCs, s0, y, meas, dyn, rparams).belief.mean;
  CHECK((xw - xr).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kalman-filter kind is exactly kf_update") {
  Rng rng(160);
  const int n = 5;
  const int m = 4;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = random_hpd(rng, n);
  const MeasurementModel meas = random_meas(rng, m, n, 0.1);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.02);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  const TrackerState out = step_baseline(TrackerKind::KalmanFilter, state, y, meas, dyn, params);
  const GaussianBelief kf = kf_update(predict(state.belief, dyn), y, meas);
  CHECK((out.belief.mean - kf.mean).norm() == 0.0);
  CHECK((out.belief.cov - kf.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step_baseline rejects kinds with dedicated steps") {
  Rng rng(161);
  const MeasurementModel meas = random_meas(rng, 3, 4, 0.1);
  const DynamicsModel dyn = DynamicsModel::random_walk(4, 0.1);
  CHECK_THROWS_AS(step_baseline(TrackerKind::PlayCs, init_state(4), random_cvec(rng, 3), meas,
                                dyn, tight_params()),
                  std::invalid_argument);
}

TEST_CASE("kf-cs: empty support degenerates to the regular-cs step") {
  Rng rng(170);
  const int n = 8;
  const int m = 5;
  const MeasurementModel meas = random_meas(rng, m, n, 0.05);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.01);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  params.lambda = 0.3;

  const CVec x_kfcs = step_kf_cs(init_state(n), y, meas, dyn, params).belief.mean;
  const CVec x_reg =
      step_baseline(TrackerKind::RegularCs, init_state(n), y, meas, dyn, params).belief.mean;
  CHECK((x_kfcs - x_reg).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kf-cs: full support degenerates to the plain Kalman update") {
  Rng rng(171);
  const int n = 5;
  const int m = 4;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = random_hpd(rng, n);
  state.support = SupportSet::full(n);
  const MeasurementModel meas = random_meas(rng, m, n, 0.1);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.02);
  const CVec y = random_cvec(rng, m);

  const TrackerState out = step_kf_cs(state, y, meas, dyn, tight_params());
  const GaussianBelief kf = kf_update(predict(state.belief, dyn), y, meas);
  CHECK((out.belief.mean - kf.mean).norm() < 1e-12);
  CHECK((out.belief.cov - kf.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kf-cs detection flags the coordinate carrying the new energy") {
  Rng rng(172);
  const int n = 14;
  const int m = 9;
  TrackerState state = init_state(n);
  state.support = SupportSet({1, 4, 6}, n);
  state.belief.mean = CVec::Zero(n);
  for (int i : state.support.indices()) state.belief.mean[i] = rng.cnormal() + cplx(1, 0);
  state.belief.cov = 1e-4 * CMat::Identity(n, n);

  const int spike_at = 10;
  CVec truth = state.belief.mean;
  truth[spike_at] = cplx(2.0, -1.0);

  const MeasurementModel meas = random_meas(rng, m, n, 1e-4);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 1e-6);
  const CVec y = meas.A * truth;

  TrackerParams params = tight_params();
  params.lambda = 0.05;
  params.alpha = 0.5;

  const TrackerState out = step_kf_cs(state, y, meas, dyn, params);

  // brute force: the T-residual correlates most strongly with the spike column
  CVec residual = y;
  for (int i : state.support.indices()) residual -= meas.A.col(i) * out.belief.mean[i];
  int best = -1;
  double best_corr = -1.0;
  const SupportSet comp_set = state.support.complement();
  for (int i : comp_set.indices()) {
    const double c = std::abs(meas.A.col(i).dot(residual));
    if (c > best_corr) {
      best_corr = c;
      best = i;
    }
  }
  CHECK(best == spike_at);
  CHECK(out.support.contains(spike_at));
  for (int i : state.support.indices()) CHECK(out.support.contains(i));
}

TEST_CASE("run_sequence: single-slot dataset equals a single step") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SyntheticSparse;
  spec.n = 10;
  spec.m = 6;
  spec.slots = 1;
  spec.sparsity = 3;
  spec.seed = 500;
  const SequenceDataset ds = generate(spec);

  TrackerParams params = tight_params();
  params.kind = TrackerKind::ModifiedCs;
  const auto seq = run_sequence(TrackerKind::ModifiedCs, ds, params);
  REQUIRE(seq.size() == 1);

  const DynamicsModel dyn = DynamicsModel::random_walk(10, params.sigma_f * params.sigma_f);
  const TrackerState direct = step_baseline(TrackerKind::ModifiedCs, init_state(10),
                                            ds.observations[0], ds.operators[0], dyn, params);
  CHECK((seq[0] - direct.belief.mean).norm() == 0.0);
}

TEST_CASE("run_sequence is deterministic and causal") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SyntheticSparse;
  spec.n = 12;
  spec.m = 7;
  spec.slots = 6;
  spec.sparsity = 3;
  spec.seed = 501;
  const SequenceDataset ds = generate(spec);

  TrackerParams params;
  params.em_iters = 3;
  const auto a = run_sequence(TrackerKind::PlayPlusCs, ds, params);
  const auto b = run_sequence(TrackerKind::PlayPlusCs, ds, params);
  REQUIRE(a.size() == b.size());
  for (size_t t = 0; t < a.size(); ++t) CHECK((a[t] - b[t]).norm() == 0.0);

  SequenceDataset prefix = ds;
  const int keep = 3;
  prefix.spec.slots = keep;
  prefix.truth.resize(keep);
  prefix.operators.resize(keep);
  prefix.observations.resize(keep);
  prefix.noise.resize(keep);
  const auto c = run_sequence(TrackerKind::PlayPlusCs, prefix, params);
  REQUIRE(c.size() == static_cast<size_t>(keep));
  for (int t = 0; t < keep; ++t) CHECK((a[static_cast<size_t>(t)] - c[static_cast<size_t>(t)]).norm() == 0.0);
}

TEST_CASE("a model without R falls back to sigma_m^2 I") {
  Rng rng(180);
  const int n = 5;
  const int m = 4;
  TrackerState state = init_state(n);
  state.belief.mean = random_cvec(rng, n);
  state.belief.cov = random_hpd(rng, n);
  const DynamicsModel dyn = DynamicsModel::random_walk(n, 0.02);
  const CVec y = random_cvec(rng, m);

  TrackerParams params = tight_params();
  params.sigma_m = 0.3;

  MeasurementModel bare;
  bare.A = random_cmat(rng, m, n);
  const MeasurementModel explicit_noise =
      MeasurementModel::isotropic(bare.A, params.sigma_m * params.sigma_m);

  const TrackerState a =
      step_baseline(TrackerKind::KalmanFilter, state, y, bare, dyn, params);
  const TrackerState b =
      step_baseline(TrackerKind::KalmanFilter, state, y, explicit_noise, dyn, params);
  CHECK((a.belief.mean - b.belief.mean).norm() == 0.0);
}

TEST_CASE("run_sequence attaches the slot index to failures") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SyntheticSparse;
  spec.n = 8;
  spec.m = 4;
  spec.slots = 3;
  spec.sparsity = 2;
  spec.seed = 16;
  SequenceDataset ds = generate(spec);
  // poison slot 2 so the Kalman update sees an indefinite innovation covariance
  ds.operators[1].R = -CMat::Identity(4, 4);

  TrackerParams params;
  params.kind = TrackerKind::KalmanFilter;
  try {
    run_sequence(TrackerKind::KalmanFilter, ds, params);
    FAIL("expected a numerical_error");
  } catch (const numerical_error& e) {
    CHECK(std::string(e.what()).find("slot 2") != std::string::npos);
  }
}

TEST_CASE("tracker kind names round-trip") {
  for (TrackerKind k :
       {TrackerKind::PlayCs, TrackerKind::PlayPlusCs, TrackerKind::KalmanFilter,
        TrackerKind::RegularCs, TrackerKind::ModifiedCs, TrackerKind::RegModCs,
        TrackerKind::WeightedL1Df, TrackerKind::KfCs}) {
    const auto parsed = tracker_kind_from_string(to_string(k));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == k);
  }
  CHECK(!tracker_kind_from_string("nope").has_value());
}

TEST_CASE("tracker params validation") {
  TrackerParams p;
  p.gamma = -0.5;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = TrackerParams{};
  p.lsm.b = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = TrackerParams{};
  p.lambda = -2.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}
