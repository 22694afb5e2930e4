#include "playcs/map_solver.hpp"

#include <cassert>
#include <cmath>

#include "playcs/kalman.hpp"
#include "playcs/rng.hpp"

namespace playcs {

namespace {

double clipped(double w) { return w < kWeightClip ? w : kWeightClip; }

CVec extract(const CVec& x, const std::vector<int>& idx) {
  CVec out(static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = x[idx[k]];
  return out;
}

void add_embedded(CVec& x, const CVec& sub, const std::vector<int>& idx) {
  for (size_t k = 0; k < idx.size(); ++k) x[idx[k]] += sub[static_cast<Eigen::Index>(k)];
}

// Smooth part folded into a single quadratic x^H H x - 2 Re(b^H x) + c
// with H = A^H Rinv A + gamma * embed(Wq). Gradient = 2 (H x - b).
struct SmoothQuadratic {
  CMat H;
  CVec b;
  double c;

  explicit SmoothQuadratic(const MapProblem& p) {
    const CMat RinvA = p.Rinv * p.A;
    H = p.A.adjoint() * RinvA;
    b = RinvA.adjoint() * p.y;
    c = std::real(p.y.dot(p.Rinv * p.y));
    if (p.gamma > 0.0 && p.support.size() > 0) {
      const auto& tidx = p.support.indices();
      const CVec pt = extract(p.pred, tidx);
      const CVec wqp = p.quad_weight * pt;
      for (size_t r = 0; r < tidx.size(); ++r) {
        b[tidx[r]] += p.gamma * wqp[static_cast<Eigen::Index>(r)];
        for (size_t s = 0; s < tidx.size(); ++s)
          H(tidx[r], tidx[s]) += p.gamma * p.quad_weight(static_cast<Eigen::Index>(r),
                                                          static_cast<Eigen::Index>(s));
      }
      c += p.gamma * std::real(pt.dot(wqp));
    }
  }

  double value(const CVec& x, const CVec& hx) const {
    return std::real(x.dot(hx)) - 2.0 * std::real(b.dot(x)) + c;
  }

  CVec gradient(const CVec& hx) const { return 2.0 * (hx - b); }
};

double l1_part(const MapProblem& p, const CVec& x, const std::vector<int>& comp) {
  double s = 0.0;
  for (size_t k = 0; k < comp.size(); ++k)
    s += clipped(p.l1_weights[static_cast<Eigen::Index>(k)]) * std::abs(x[comp[k]] - p.pred[comp[k]]);
  return s;
}

}  // namespace

void validate_problem(const MapProblem& p) {
  const int n = p.n();
  const int m = p.m();
  if (p.y.size() != m || p.Rinv.rows() != m || p.Rinv.cols() != m)
    throw std::invalid_argument("MapProblem: measurement dimensions disagree");
  if (p.pred.size() != n || p.support.ambient_dim() != n)
    throw std::invalid_argument("MapProblem: state dimensions disagree");
  const int t = p.support.size();
  if (p.quad_weight.rows() != t || p.quad_weight.cols() != t)
    throw std::invalid_argument("MapProblem: quad_weight must be |T| x |T|");
  if (p.l1_weights.size() != n - t)
    throw std::invalid_argument("MapProblem: l1_weights must cover T^c");
  if (p.gamma < 0.0) throw std::invalid_argument("MapProblem: gamma must be nonnegative");
  for (Eigen::Index i = 0; i < p.l1_weights.size(); ++i)
    if (!(p.l1_weights[i] > 0.0) || !std::isfinite(p.l1_weights[i]))
      throw std::invalid_argument("MapProblem: l1 weights must be positive and finite");
  if (t > 0 && hermitian_residual(p.quad_weight) > 1e-8 * (1.0 + p.quad_weight.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("MapProblem: quad_weight must be Hermitian");
}

double objective(const MapProblem& p, const CVec& x) {
  const CVec r = p.y - p.A * x;
  double val = std::real(r.dot(p.Rinv * r));
  if (p.gamma > 0.0 && p.support.size() > 0) {
    const CVec dt = extract(x - p.pred, p.support.indices());
    val += p.gamma * std::real(dt.dot(p.quad_weight * dt));
  }
  val += l1_part(p, x, p.support.complement().indices());
  return val;
}

CVec smooth_gradient(const MapProblem& p, const CVec& x) {
  CVec g = 2.0 * (p.A.adjoint() * (p.Rinv * (p.A * x - p.y)));
  if (p.gamma > 0.0 && p.support.size() > 0) {
    const CVec dt = extract(x - p.pred, p.support.indices());
    add_embedded(g, (2.0 * p.gamma) * (p.quad_weight * dt), p.support.indices());
  }
  return g;
}

CVec prox_shifted_weighted_l1(const CVec& v, const MapProblem& p, double step) {
  if (step <= 0.0) throw std::invalid_argument("prox: step must be positive");
  CVec out = v;
  const auto comp = p.support.complement().indices();
  for (size_t k = 0; k < comp.size(); ++k) {
    const int i = comp[k];
    const double tau = step * clipped(p.l1_weights[static_cast<Eigen::Index>(k)]);
    out[i] = p.pred[i] + shrink(v[i] - p.pred[i], tau);
  }
  return out;
}

double lipschitz_estimate(const MapProblem& p) {
  const int n = p.n();
  const auto& tidx = p.support.indices();
  const auto apply = [&](const CVec& v) -> CVec {
    CVec out = 2.0 * (p.A.adjoint() * (p.Rinv * (p.A * v)));
    if (p.gamma > 0.0 && !tidx.empty())
      add_embedded(out, (2.0 * p.gamma) * (p.quad_weight * extract(v, tidx)), tidx);
    return out;
  };

  // Deterministic pseudorandom start vector.
  CVec v(n);
  for (int i = 0; i < n; ++i) {
    const uint64_t h = splitmix64(static_cast<uint64_t>(i) + 1);
    const double re = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    const double im = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    v[i] = cplx(re, im);
  }
  v.normalize();

  double lam = 0.0;
  for (int it = 0; it < 30; ++it) {
    CVec w = apply(v);
    const double nw = w.norm();
    if (nw == 0.0) return 1.0;
    lam = nw;
    v = w / nw;
  }
  return 1.1 * lam;
}

double optimality_residual(const MapProblem& p, const CVec& x) {
  if (x.size() != p.n()) throw std::invalid_argument("optimality_residual: dimension mismatch");
  const CVec g = smooth_gradient(p, x);
  double res = 0.0;
  for (int i : p.support.indices()) res = std::max(res, std::abs(g[i]));
  const auto comp = p.support.complement().indices();
  for (size_t k = 0; k < comp.size(); ++k) {
    const int i = comp[k];
    const double w = clipped(p.l1_weights[static_cast<Eigen::Index>(k)]);
    const cplx d = x[i] - p.pred[i];
    if (d == cplx(0.0, 0.0)) {
      res = std::max(res, std::max(std::abs(g[i]) - w, 0.0));
    } else {
      res = std::max(res, std::abs(g[i] + w * d / std::abs(d)));
    }
  }
  return res;
}

std::pair<CVec, SolverReport> solve_map(const MapProblem& p, const SolverOptions& opts) {
  return solve_map(p, opts, p.pred);
}

std::pair<CVec, SolverReport> solve_map(const MapProblem& p, const SolverOptions& opts,
                                        const CVec& x0) {
  validate_problem(p);
  if (x0.size() != p.n()) throw std::invalid_argument("solve_map: bad warm start dimension");
  if (opts.max_iters < 1 || opts.rel_tol <= 0.0 || opts.kkt_tol <= 0.0 ||
      opts.backtrack_factor <= 0.0 || opts.backtrack_factor >= 1.0)
    throw std::invalid_argument("solve_map: invalid options");

  const SmoothQuadratic smooth(p);
  const auto comp = p.support.complement().indices();

  const auto composite = [&](const CVec& x, const CVec& hx) {
    return smooth.value(x, hx) + l1_part(p, x, comp);
  };

  double step = 1.0 / lipschitz_estimate(p);

  CVec x = x0;
  CVec hx = smooth.H * x;
  double fx = composite(x, hx);
  if (!std::isfinite(fx)) throw numerical_error("solve_map: non-finite objective");

  // One backtracked proximal step from `base`; returns the new point with
  // its H-product and smooth value, shrinking `step` until the local
  // quadratic model majorizes the smooth part.
  struct Point {
    CVec x;
    CVec hx;
    double smooth_val;
  };
  const auto descend = [&](const CVec& base, const CVec& hbase) -> Point {
    const double fbase = smooth.value(base, hbase);
    const CVec g = smooth.gradient(hbase);
    for (;;) {
      CVec cand = prox_shifted_weighted_l1(base - step * g, p, step);
      CVec hcand = smooth.H * cand;
      const double fcand = smooth.value(cand, hcand);
      if (!std::isfinite(fcand)) throw numerical_error("solve_map: non-finite objective");
      const CVec d = cand - base;
      const double model = fbase + std::real(g.dot(d)) + d.squaredNorm() / (2.0 * step);
      if (fcand <= model + 1e-12 * (1.0 + std::abs(fbase))) return {std::move(cand), std::move(hcand), fcand};
      step *= opts.backtrack_factor;
      if (step < 1e-300) throw numerical_error("solve_map: backtracking failed");
    }
  };

  CVec z = x;
  CVec hz = hx;
  double t = 1.0;
  SolverReport report;

  for (int k = 1; k <= opts.max_iters; ++k) {
    Point cand = descend(z, hz);
    double fcand = cand.smooth_val + l1_part(p, cand.x, comp);

    CVec xn;
    CVec hxn;
    double fn;
    if (fcand <= fx) {
      xn = std::move(cand.x);
      hxn = std::move(cand.hx);
      fn = fcand;
    } else {
      // Accelerated candidate went uphill: plain descent step from x.
      Point safe = descend(x, hx);
      const double fsafe = safe.smooth_val + l1_part(p, safe.x, comp);
      if (fsafe <= fx) {
        xn = std::move(safe.x);
        hxn = std::move(safe.hx);
        fn = fsafe;
      } else {
        xn = x;  // float-noise guard: keep the current iterate
        hxn = hx;
        fn = fx;
      }
    }
    assert(fn <= fx);

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = xn + ((t - 1.0) / tn) * (xn - x);
    hz = smooth.H * z;
    t = tn;

    const double rel = (xn - x).norm() / std::max(x.norm(), 1e-12);
    x = std::move(xn);
    hx = std::move(hxn);
    fx = fn;
    report.iterations = k;
    if (opts.on_iteration) opts.on_iteration(k, fx);
    if (rel < opts.rel_tol) break;
  }

  report.final_objective = objective(p, x);
  report.kkt_residual = optimality_residual(p, x);
  report.converged = report.kkt_residual <= opts.kkt_tol;
  return {std::move(x), report};
}

}  // namespace playcs
