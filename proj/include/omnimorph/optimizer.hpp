#pragma once

// Small dense in-house solvers sized for the platform's hot loops:
// an 8-variable box-constrained strictly convex QP (primal active set) and
// a bounded-variable LP (two-phase simplex, Bland's rule).

#include "omnimorph/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace omnimorph {

// minimize 1/2 x'Hx + g'x  s.t.  lower <= x <= upper   (H SPD)
struct BoxQP {
  Mat8 H = Mat8::Identity();
  Vec8 g = Vec8::Zero();
  Vec8 lower = Vec8::Constant(-1.0);
  Vec8 upper = Vec8::Constant(1.0);
};

// Per-coordinate working-set tag: -1 at lower, 0 free, +1 at upper.
using QpActiveSet = std::array<std::int8_t, kNumProps>;

struct QpResult {
  Vec8 x = Vec8::Zero();
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  QpActiveSet active{};  // final working set, reusable as a warm start
};

// Projected-gradient stationarity measure; zero exactly at a KKT point.
inline double box_qp_kkt_residual(const BoxQP& qp, const Vec8& x) {
  const Vec8 grad = qp.H * x + qp.g;
  double r = 0.0;
  for (int i = 0; i < kNumProps; ++i) {
    const double stepped = std::min(qp.upper[i], std::max(qp.lower[i], x[i] - grad[i]));
    r = std::max(r, std::abs(x[i] - stepped));
  }
  return r;
}

inline double box_qp_cost(const BoxQP& qp, const Vec8& x) {
  return 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
}

// Primal active-set solve. The working set holds coordinates clamped at a
// bound; each outer iteration solves the free-coordinate Newton system by
// Cholesky, then either blocks on the first violated bound or releases the
// worst mis-signed multiplier.
inline QpResult solve_box_qp(const BoxQP& qp, double tol = 1e-9,
                             const QpActiveSet* warm_start = nullptr, int max_iter = 200) {
  for (int i = 0; i < kNumProps; ++i) {
    if (!(qp.lower[i] <= qp.upper[i]))
      throw std::invalid_argument("solve_box_qp: lower bound exceeds upper bound");
  }
  if ((qp.H - qp.H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + qp.H.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_box_qp: H must be symmetric");

  QpActiveSet W{};
  if (warm_start) W = *warm_start;
  QpResult res;
  // Start from a feasible point consistent with the working set.
  for (int i = 0; i < kNumProps; ++i) {
    if (qp.lower[i] == qp.upper[i]) W[i] = -1;  // permanently fixed
    if (W[i] == -1) res.x[i] = qp.lower[i];
    else if (W[i] == +1) res.x[i] = qp.upper[i];
    else res.x[i] = std::min(qp.upper[i], std::max(qp.lower[i], 0.0));
  }

  std::vector<int> free_idx;
  free_idx.reserve(kNumProps);
  for (int iter = 1; iter <= max_iter; ++iter) {
    res.iterations = iter;

    free_idx.clear();
    for (int i = 0; i < kNumProps; ++i)
      if (W[i] == 0) free_idx.push_back(i);

    // Equality-constrained subproblem over the free coordinates.
    Vec8 x_sub = res.x;
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        double acc = qp.g[free_idx[a]];
        for (int i = 0; i < kNumProps; ++i)
          if (W[i] != 0) acc += qp.H(free_idx[a], i) * res.x[i];
        rhs[a] = -acc;
        for (int b = 0; b < nf; ++b) Hff(a, b) = qp.H(free_idx[a], free_idx[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(Hff);
      if (llt.info() != Eigen::Success)
        throw std::invalid_argument("solve_box_qp: H must be positive definite");
      const Eigen::VectorXd xf = llt.solve(rhs);
      for (int a = 0; a < nf; ++a) x_sub[free_idx[a]] = xf[a];
    }

    // Ratio test along the segment from the current point to the subproblem
    // minimizer; block on the first bound hit.
    double t_max = 1.0;
    int block = -1, block_side = 0;
    for (int a : free_idx) {
      const double dx = x_sub[a] - res.x[a];
      if (dx > tol && x_sub[a] > qp.upper[a]) {
        const double t = (qp.upper[a] - res.x[a]) / dx;
        if (t < t_max) { t_max = t; block = a; block_side = +1; }
      } else if (dx < -tol && x_sub[a] < qp.lower[a]) {
        const double t = (qp.lower[a] - res.x[a]) / dx;
        if (t < t_max) { t_max = t; block = a; block_side = -1; }
      }
    }

    if (block >= 0) {
      for (int a : free_idx) res.x[a] += t_max * (x_sub[a] - res.x[a]);
      res.x[block] = (block_side > 0) ? qp.upper[block] : qp.lower[block];
      W[block] = static_cast<std::int8_t>(block_side);
      continue;
    }

    res.x = x_sub;
    for (int i = 0; i < kNumProps; ++i)  // shed sub-tolerance roundoff drift
      res.x[i] = std::min(qp.upper[i], std::max(qp.lower[i], res.x[i]));
    // Multiplier signs: release the most negative Lagrange multiplier.
    const Vec8 grad = qp.H * res.x + qp.g;
    int worst = -1;
    double worst_mult = -tol;
    for (int i = 0; i < kNumProps; ++i) {
      if (W[i] == 0 || qp.lower[i] == qp.upper[i]) continue;
      const double mult = (W[i] == -1) ? grad[i] : -grad[i];
      if (mult < worst_mult) { worst_mult = mult; worst = i; }
    }
    if (worst < 0) {
      res.converged = true;
      break;
    }
    W[worst] = 0;
  }

  res.cost = box_qp_cost(qp, res.x);
  res.active = W;
  return res;
}

// maximize c'x  s.t.  A_eq x = b_eq,  lower <= x <= upper   (finite bounds)
struct BoundedLP {
  Eigen::MatrixXd A_eq;  // m x n
  Eigen::VectorXd b_eq;  // m
  Eigen::VectorXd c;     // n
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

namespace detail {

// One simplex phase over structural columns A (with appended artificial
// identity columns). basis/at_upper are updated in place.
struct SimplexTableau {
  const Eigen::MatrixXd& cols;   // m x (n + m), artificial block included
  const Eigen::VectorXd& b;
  const Eigen::VectorXd& lo;     // length n + m
  const Eigen::VectorXd& hi;
  std::vector<int>& basis;       // m entries
  std::vector<std::uint8_t>& at_upper;  // n + m entries, nonbasic bound side
};

inline LpStatus simplex_phase(SimplexTableau t, const Eigen::VectorXd& obj, double tol,
                              int max_iter, int* iter_count) {
  const int m = static_cast<int>(t.cols.rows());
  const int total = static_cast<int>(t.cols.cols());

  for (int iter = 0; iter < max_iter; ++iter) {
    ++*iter_count;
    Eigen::MatrixXd B(m, m);
    for (int r = 0; r < m; ++r) B.col(r) = t.cols.col(t.basis[r]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) return LpStatus::IterationLimit;  // defensive; basis kept invertible

    std::vector<std::uint8_t> is_basic(total, 0);
    for (int idx : t.basis) is_basic[idx] = 1;

    Eigen::VectorXd rhs = t.b;
    for (int j = 0; j < total; ++j) {
      if (is_basic[j]) continue;
      const double xj = t.at_upper[j] ? t.hi[j] : t.lo[j];
      if (xj != 0.0) rhs -= t.cols.col(j) * xj;
    }
    const Eigen::VectorXd xB = lu.solve(rhs);

    Eigen::VectorXd cB(m);
    for (int r = 0; r < m; ++r) cB[r] = obj[t.basis[r]];
    const Eigen::VectorXd y = lu.transpose().solve(cB);

    // Bland: smallest-index eligible entering variable.
    int enter = -1, dir = 0;
    for (int j = 0; j < total; ++j) {
      if (is_basic[j] || t.hi[j] - t.lo[j] <= 0.0) continue;
      const double d = obj[j] - y.dot(t.cols.col(j));
      if (!t.at_upper[j] && d > tol) { enter = j; dir = +1; break; }
      if (t.at_upper[j] && d < -tol) { enter = j; dir = -1; break; }
    }
    if (enter < 0) return LpStatus::Optimal;

    const Eigen::VectorXd w = lu.solve(t.cols.col(enter));

    double t_best = t.hi[enter] - t.lo[enter];  // bound-flip distance
    int leave_row = -1, leave_side = 0;
    for (int r = 0; r < m; ++r) {
      const double delta = dir * w[r];
      double ratio;
      int side;
      if (delta > tol) { ratio = (xB[r] - t.lo[t.basis[r]]) / delta; side = -1; }
      else if (delta < -tol) { ratio = (t.hi[t.basis[r]] - xB[r]) / (-delta); side = +1; }
      else continue;
      if (ratio < 0.0) ratio = 0.0;  // guard against roundoff infeasibility
      const bool better = ratio < t_best - tol;
      const bool tie = !better && ratio < t_best + tol && leave_row >= 0 &&
                       t.basis[r] < t.basis[leave_row];
      if (better || tie) {
        t_best = std::min(t_best, ratio);  // Bland tie-break keeps the min step
        leave_row = r;
        leave_side = side;
      }
    }

    if (!std::isfinite(t_best)) return LpStatus::Unbounded;

    if (leave_row < 0) {
      t.at_upper[enter] = !t.at_upper[enter];  // pure bound flip
      continue;
    }
    const int leaving = t.basis[leave_row];
    t.basis[leave_row] = enter;
    t.at_upper[leaving] = (leave_side > 0) ? 1 : 0;
    t.at_upper[enter] = 0;  // entering becomes basic
  }
  return LpStatus::IterationLimit;
}

}  // namespace detail

inline LpResult solve_lp(const BoundedLP& lp, double tol = 1e-9, int max_iter = 10000) {
  const int m = static_cast<int>(lp.A_eq.rows());
  const int n = static_cast<int>(lp.A_eq.cols());
  if (lp.b_eq.size() != m || lp.c.size() != n || lp.lower.size() != n || lp.upper.size() != n)
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  if (m > n) throw std::invalid_argument("solve_lp: more equality rows than variables");
  for (int j = 0; j < n; ++j) {
    if (!(std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j]) && lp.lower[j] <= lp.upper[j]))
      throw std::invalid_argument("solve_lp: bounds must be finite and ordered");
  }

  LpResult res;
  if (m == 0) {
    res.status = LpStatus::Optimal;
    res.x.resize(n);
    for (int j = 0; j < n; ++j) res.x[j] = (lp.c[j] > 0.0) ? lp.upper[j] : lp.lower[j];
    res.value = lp.c.dot(res.x);
    return res;
  }

  const int total = n + m;
  Eigen::MatrixXd cols(m, total);
  cols.leftCols(n) = lp.A_eq;

  // Nonbasic structurals start at the bound of smaller magnitude.
  std::vector<std::uint8_t> at_upper(total, 0);
  Eigen::VectorXd lo(total), hi(total);
  for (int j = 0; j < n; ++j) {
    lo[j] = lp.lower[j];
    hi[j] = lp.upper[j];
    at_upper[j] = std::abs(lp.upper[j]) < std::abs(lp.lower[j]) ? 1 : 0;
  }

  // Artificial start values absorb the residual; orient columns so they are
  // nonnegative.
  Eigen::VectorXd resid = lp.b_eq;
  for (int j = 0; j < n; ++j) resid -= lp.A_eq.col(j) * (at_upper[j] ? hi[j] : lo[j]);
  std::vector<int> basis(m);
  const double big = 1.0 + resid.cwiseAbs().maxCoeff();
  for (int r = 0; r < m; ++r) {
    cols.col(n + r) = Eigen::VectorXd::Unit(m, r) * (resid[r] < 0.0 ? -1.0 : 1.0);
    lo[n + r] = 0.0;
    hi[n + r] = 2.0 * big;
    basis[r] = n + r;
  }

  detail::SimplexTableau tab{cols, lp.b_eq, lo, hi, basis, at_upper};

  // Phase 1: drive the artificial variables to zero.
  Eigen::VectorXd phase1_obj = Eigen::VectorXd::Zero(total);
  phase1_obj.tail(m).setConstant(-1.0);
  LpStatus st = detail::simplex_phase(tab, phase1_obj, tol, max_iter, &res.iterations);
  if (st != LpStatus::Optimal) { res.status = st; return res; }

  auto current_x = [&](Eigen::VectorXd* full) {
    Eigen::MatrixXd B(m, m);
    for (int r = 0; r < m; ++r) B.col(r) = cols.col(basis[r]);
    Eigen::VectorXd rhs = lp.b_eq;
    std::vector<std::uint8_t> is_basic(total, 0);
    for (int idx : basis) is_basic[idx] = 1;
    for (int j = 0; j < total; ++j) {
      if (is_basic[j]) continue;
      (*full)[j] = at_upper[j] ? hi[j] : lo[j];
      rhs -= cols.col(j) * (*full)[j];
    }
    const Eigen::VectorXd xB = Eigen::FullPivLU<Eigen::MatrixXd>(B).solve(rhs);
    for (int r = 0; r < m; ++r) (*full)[basis[r]] = xB[r];
  };

  Eigen::VectorXd full = Eigen::VectorXd::Zero(total);
  current_x(&full);
  if (full.tail(m).cwiseAbs().maxCoeff() > 1e-7) {
    res.status = LpStatus::Infeasible;
    return res;
  }

  // Phase 2: pin artificials to zero and optimize the real objective.
  for (int r = 0; r < m; ++r) hi[n + r] = 0.0;
  for (int j = n; j < total; ++j) at_upper[j] = 0;
  Eigen::VectorXd phase2_obj = Eigen::VectorXd::Zero(total);
  phase2_obj.head(n) = lp.c;
  st = detail::simplex_phase(tab, phase2_obj, tol, max_iter, &res.iterations);
  if (st == LpStatus::IterationLimit) { res.status = st; return res; }
  if (st == LpStatus::Unbounded) { res.status = st; return res; }

  current_x(&full);
  res.x = full.head(n);
  for (int j = 0; j < n; ++j)  // shed roundoff drift of basic variables
    res.x[j] = std::min(lp.upper[j], std::max(lp.lower[j], res.x[j]));
  res.value = lp.c.dot(res.x);
  res.status = LpStatus::Optimal;
  return res;
}

}  // namespace omnimorph
