#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "supmeas/error.hpp"

namespace supmeas {

/// maximize c.x  subject to  A x <= b,  lo <= x <= hi.
/// All variable bounds must be finite; "free" variables are modeled with a
/// large box and the caller treats an active box bound as Unbounded.
struct LPProblem {
  std::size_t rows = 0;
  std::size_t vars = 0;
  std::vector<double> A; // row-major, rows x vars
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> lo, hi;

  double a(std::size_t i, std::size_t j) const { return A[i * vars + j]; }
  double& a(std::size_t i, std::size_t j) { return A[i * vars + j]; }

  void add_row(const std::vector<double>& coeffs, double rhs) {
    A.insert(A.end(), coeffs.begin(), coeffs.end());
    b.push_back(rhs);
    ++rows;
  }
};

enum class LPStatus { Optimal, Infeasible, Unbounded, Stalled };

struct LPSolution {
  LPStatus status = LPStatus::Stalled;
  std::vector<double> x;
  std::vector<double> row_dual; // y >= 0 for A x <= b
  double objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

/// Dense bounded-variable primal simplex (full tableau, incremental cost
/// rows). Feasibility is restored with a single artificial column driven to
/// zero; pricing is Dantzig with a Bland fallback after a stall.
class BoundedSimplex {
public:
  explicit BoundedSimplex(const LPProblem& p)
      : m_(p.rows), n_(p.vars + 1 /*artificial*/), user_vars_(p.vars) {
    nv_ = n_ + m_;
    lo_.assign(nv_, 0.0);
    hi_.assign(nv_, 0.0);
    cost_.assign(nv_, 0.0);
    acost_.assign(nv_, 0.0);
    for (std::size_t j = 0; j < user_vars_; ++j) {
      lo_[j] = p.lo[j];
      hi_[j] = p.hi[j];
      cost_[j] = p.c[j];
      if (!(lo_[j] <= hi_[j]) || !std::isfinite(lo_[j]) || !std::isfinite(hi_[j]))
        fail(ErrorKind::InvalidInput, "lp_solve requires finite variable bounds");
    }
    acost_[user_vars_] = -1.0; // phase A maximizes -t
    for (std::size_t i = 0; i < m_; ++i) {
      lo_[n_ + i] = 0.0;
      hi_[n_ + i] = std::numeric_limits<double>::infinity();
    }

    xval_.assign(nv_, 0.0);
    for (std::size_t j = 0; j < user_vars_; ++j)
      xval_[j] = std::abs(hi_[j]) < std::abs(lo_[j]) ? hi_[j] : lo_[j];

    // residuals with nonbasics at bounds decide whether the artificial is live
    std::vector<double> resid(m_);
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double r = p.b[i];
      for (std::size_t j = 0; j < user_vars_; ++j)
        if (p.a(i, j) != 0.0) r -= p.a(i, j) * xval_[j];
      resid[i] = r;
      worst = std::min(worst, r);
    }
    double t0 = worst < 0.0 ? -worst * (1.0 + 1e-9) + 1e-12 : 0.0;
    lo_[user_vars_] = 0.0;
    hi_[user_vars_] = t0 > 0.0 ? t0 : 0.0;
    xval_[user_vars_] = hi_[user_vars_];
    need_phase_a_ = t0 > 0.0;

    T_.assign(m_ * nv_, 0.0);
    basis_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < user_vars_; ++j) T_[i * nv_ + j] = p.a(i, j);
      if (resid[i] < 0.0) T_[i * nv_ + user_vars_] = -1.0;
      T_[i * nv_ + n_ + i] = 1.0;
      basis_[i] = n_ + i;
      xval_[n_ + i] = resid[i] + (resid[i] < 0.0 ? xval_[user_vars_] : 0.0);
    }
    // reduced-cost rows (all-slack basis: z_j = c_j)
    zrow_ = cost_;
    azrow_ = acost_;
  }

  LPSolution solve(const LPProblem& p, std::size_t max_iters) {
    LPSolution sol;
    std::size_t it = 0;
    if (need_phase_a_) {
      if (!run(azrow_, max_iters, it, sol)) { finish(p, sol, sol.status); return sol; }
      if (xval_[user_vars_] > 1e-8) { finish(p, sol, LPStatus::Infeasible); return sol; }
      // pin the artificial at zero so phase B cannot resurrect it
      if (!pin_artificial()) { finish(p, sol, LPStatus::Stalled); return sol; }
    }
    if (!run(zrow_, max_iters, it, sol)) { finish(p, sol, sol.status); return sol; }
    sol.iterations = it;
    finish(p, sol, LPStatus::Optimal);
    return sol;
  }

private:
  bool pin_artificial() {
    std::size_t t = user_vars_;
    hi_[t] = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] != t) continue;
      // pivot it out on any eligible column
      for (std::size_t j = 0; j < nv_; ++j) {
        if (j == t || std::abs(T_[i * nv_ + j]) < 1e-9) continue;
        if (is_basic(j)) continue;
        pivot(i, j);
        xval_[t] = 0.0;
        return true;
      }
      return std::abs(xval_[t]) < 1e-9; // all-zero row: drop silently if zero
    }
    return true;
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] == j) return true;
    return false;
  }

  // Runs the simplex on reduced-cost row z. Returns false on failure with
  // sol.status set; true at optimality.
  bool run(std::vector<double>& z, std::size_t max_iters, std::size_t& it,
           LPSolution& sol) {
    constexpr double kTol = 1e-9;
    std::size_t stall = 0;
    std::vector<char> basic_mark(nv_, 0);
    for (; it < max_iters; ++it) {
      std::fill(basic_mark.begin(), basic_mark.end(), 0);
      for (std::size_t i = 0; i < m_; ++i) basic_mark[basis_[i]] = 1;
      bool bland = stall > 64;
      std::size_t enter = nv_;
      int dir = 0;
      double best = kTol;
      for (std::size_t j = 0; j < nv_; ++j) {
        if (basic_mark[j]) continue;
        double d = z[j];
        int want = 0;
        if (d > kTol && xval_[j] < hi_[j] - 1e-30) want = +1;
        else if (d < -kTol && xval_[j] > lo_[j] + 1e-30) want = -1;
        if (!want) continue;
        if (bland) { enter = j; dir = want; break; }
        if (std::abs(d) > best) { best = std::abs(d); enter = j; dir = want; }
      }
      if (enter == nv_) return true; // optimal for this objective

      // ratio test
      double tmax = hi_[enter] - lo_[enter];
      std::size_t leave_row = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        double deriv = -static_cast<double>(dir) * T_[i * nv_ + enter];
        std::size_t bj = basis_[i];
        double t;
        if (deriv < -1e-11) {
          t = (xval_[bj] - lo_[bj]) / (-deriv);
        } else if (deriv > 1e-11) {
          if (!std::isfinite(hi_[bj])) continue;
          t = (hi_[bj] - xval_[bj]) / deriv;
        } else {
          continue;
        }
        if (t < -1e-12) t = 0.0;
        if (t < tmax - 1e-15 ||
            (leave_row != m_ && t <= tmax + 1e-15 && bland &&
             basis_[i] < basis_[leave_row])) {
          tmax = t;
          leave_row = i;
        }
      }
      if (!std::isfinite(tmax)) {
        sol.status = LPStatus::Unbounded;
        return false;
      }
      double step = std::max(tmax, 0.0);
      if (step <= 1e-13) ++stall; else stall = 0;
      // move
      xval_[enter] += dir * step;
      for (std::size_t i = 0; i < m_; ++i)
        xval_[basis_[i]] -= static_cast<double>(dir) * step * T_[i * nv_ + enter];
      if (leave_row == m_) {
        xval_[enter] = dir > 0 ? hi_[enter] : lo_[enter]; // exact bound flip
        continue;
      }
      // snap leaving variable to the bound it hit
      std::size_t leave = basis_[leave_row];
      double deriv = -static_cast<double>(dir) * T_[leave_row * nv_ + enter];
      xval_[leave] = deriv < 0 ? lo_[leave] : hi_[leave];
      pivot(leave_row, enter);
      if (stall > 20000) {
        sol.status = LPStatus::Stalled;
        return false;
      }
    }
    sol.status = LPStatus::Stalled;
    return false;
  }

  void pivot(std::size_t row, std::size_t enter) {
    double piv = T_[row * nv_ + enter];
    double inv = 1.0 / piv;
    double* prow = &T_[row * nv_];
    for (std::size_t j = 0; j < nv_; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      double f = T_[i * nv_ + enter];
      if (f == 0.0) continue;
      double* irow = &T_[i * nv_];
      for (std::size_t j = 0; j < nv_; ++j) irow[j] -= f * prow[j];
      irow[enter] = 0.0;
    }
    for (auto* z : {&zrow_, &azrow_}) {
      double f = (*z)[enter];
      if (f != 0.0) {
        for (std::size_t j = 0; j < nv_; ++j) (*z)[j] -= f * prow[j];
        (*z)[enter] = 0.0;
      }
    }
    basis_[row] = enter;
  }

  void finish(const LPProblem& p, LPSolution& sol, LPStatus st) const {
    sol.status = st;
    sol.x.assign(xval_.begin(), xval_.begin() + static_cast<long>(user_vars_));
    sol.objective = 0.0;
    for (std::size_t j = 0; j < user_vars_; ++j)
      sol.objective += p.c[j] * xval_[j];
    // y_i = c_B B^-1 e_i = -(reduced cost of slack i)
    sol.row_dual.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      sol.row_dual[i] = std::max(-zrow_[n_ + i], 0.0);
    double d = 0.0;
    for (std::size_t i = 0; i < m_; ++i) d += sol.row_dual[i] * p.b[i];
    for (std::size_t j = 0; j < user_vars_; ++j) {
      double zz = p.c[j];
      for (std::size_t i = 0; i < m_; ++i)
        if (sol.row_dual[i] != 0.0) zz -= sol.row_dual[i] * p.a(i, j);
      d += zz > 0 ? p.hi[j] * zz : p.lo[j] * zz;
    }
    sol.dual_objective = d;
    sol.duality_gap = d - sol.objective;
  }

  std::size_t m_, n_, nv_, user_vars_;
  bool need_phase_a_ = false;
  std::vector<double> T_;
  std::vector<double> lo_, hi_, cost_, acost_, zrow_, azrow_;
  std::vector<double> xval_;
  std::vector<std::size_t> basis_;
};

} // namespace detail

inline LPSolution lp_solve(const LPProblem& p, std::size_t max_iters = 500000) {
  if (p.A.size() != p.rows * p.vars || p.b.size() != p.rows ||
      p.c.size() != p.vars || p.lo.size() != p.vars || p.hi.size() != p.vars)
    fail(ErrorKind::InvalidInput, "lp_solve: inconsistent problem sizes");
  detail::BoundedSimplex t(p);
  LPSolution sol = t.solve(p, max_iters);
  if (sol.status == LPStatus::Stalled)
    fail(ErrorKind::SolverStall, "lp_solve: simplex stalled");
  return sol;
}

/// Serialize in CPLEX-LP-style text for external cross-checks.
inline std::string lp_dump(const LPProblem& p) {
  std::string s = "Maximize\n obj:";
  auto num = [](double v) { return std::to_string(v); };
  for (std::size_t j = 0; j < p.vars; ++j)
    s += (p.c[j] >= 0 ? " + " : " - ") + num(std::abs(p.c[j])) + " x" + std::to_string(j);
  s += "\nSubject To\n";
  for (std::size_t i = 0; i < p.rows; ++i) {
    s += " r" + std::to_string(i) + ":";
    for (std::size_t j = 0; j < p.vars; ++j) {
      double a = p.a(i, j);
      if (a == 0.0) continue;
      s += (a >= 0 ? " + " : " - ") + num(std::abs(a)) + " x" + std::to_string(j);
    }
    s += " <= " + num(p.b[i]) + "\n";
  }
  s += "Bounds\n";
  for (std::size_t j = 0; j < p.vars; ++j)
    s += " " + num(p.lo[j]) + " <= x" + std::to_string(j) + " <= " + num(p.hi[j]) + "\n";
  s += "End\n";
  return s;
}

} // namespace supmeas
