#pragma once

// Small dense two-phase simplex. Sized for the time-share subproblem
// (2K variables, about 2K + 2 rows); no sparsity, no presolve.
//
//   maximize  c·x   subject to  A_i·x (<= | >=) b_i,  x >= 0.
//
// Bland's rule is used throughout so degenerate vertices cannot cycle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hapcsr::lp {

enum class Relation { less_equal, greater_equal };

struct Row {
  std::vector<double> coeffs;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct Problem {
  std::vector<double> objective;
  std::vector<Row> rows;

  std::size_t variable_count() const { return objective.size(); }

  std::size_t add_row(std::vector<double> coeffs, Relation rel, double rhs) {
    if (coeffs.size() != objective.size()) throw std::invalid_argument("lp: row width mismatch");
    rows.push_back({std::move(coeffs), rel, rhs});
    return rows.size() - 1;
  }
};

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = -std::numeric_limits<double>::infinity();
  // Rows left unsatisfied by the least-infeasible phase-1 point.
  std::vector<std::size_t> conflicting_rows;
  std::size_t pivots = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double rhs(std::size_t r) const { return at(r, n_); }
  // Row m_ holds reduced costs of the maximization objective; rhs(m_) = -z.
  double& cost(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= n_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
};

inline constexpr double kPivotTol = 1e-12;

// Runs Bland-rule simplex iterations on the cost row; columns with
// allowed[c] == false never enter. Returns false when unbounded.
inline bool iterate(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed,
                    double cost_tol, std::size_t& pivots) {
  const std::size_t max_pivots = 50 * (t.rows() + t.cols()) + 1000;
  for (std::size_t it = 0; it < max_pivots; ++it) {
    std::size_t enter = t.cols();
    for (std::size_t c = 0; c < t.cols(); ++c) {
      if (allowed[c] && t.cost(c) > cost_tol) {
        enter = c;
        break;
      }
    }
    if (enter == t.cols()) return true;

    std::size_t leave = t.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= kPivotTol) continue;
      const double ratio = t.rhs(r) / a;
      if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave != t.rows() && basis[r] < basis[leave])) {
        best = std::min(best, ratio);
        leave = r;
      }
    }
    if (leave == t.rows()) return false;
    t.pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
  throw std::runtime_error("lp: pivot limit exceeded");
}

// Rebuilds every tableau row as B^-1 times the original rows, and the cost
// row from `cost`, wiping out the round-off the pivots have accumulated.
// Returns false when the basis matrix is numerically singular.
inline bool reinvert(Tableau& t, const Tableau& initial, const std::vector<std::size_t>& basis,
                     const std::vector<double>& cost) {
  const std::size_t m = t.rows(), w = m + t.cols() + 1;
  std::vector<double> aug(m * w);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < m; ++i) aug[r * w + i] = initial.at(r, basis[i]);
    for (std::size_t c = 0; c <= t.cols(); ++c) aug[r * w + m + c] = initial.at(r, c);
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(aug[r * w + col]) > std::abs(aug[piv * w + col])) piv = r;
    if (std::abs(aug[piv * w + col]) < 1e-14) return false;
    if (piv != col)
      for (std::size_t c = 0; c < w; ++c) std::swap(aug[piv * w + c], aug[col * w + c]);
    const double inv = 1.0 / aug[col * w + col];
    for (std::size_t c = col; c < w; ++c) aug[col * w + c] *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      const double f = aug[r * w + col];
      if (r == col || f == 0.0) continue;
      for (std::size_t c = col; c < w; ++c) aug[r * w + c] -= f * aug[col * w + c];
    }
  }
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c <= t.cols(); ++c) t.at(r, c) = aug[r * w + m + c];
  for (std::size_t r = 0; r < m; ++r) t.at(r, basis[r]) = 1.0;
  for (std::size_t c = 0; c <= t.cols(); ++c) {
    double v = c < cost.size() ? cost[c] : 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t b = basis[r];
      if (b < cost.size() && cost[b] != 0.0) v -= cost[b] * t.at(r, c);
    }
    t.at(m, c) = v;
  }
  for (std::size_t r = 0; r < m; ++r) t.cost(basis[r]) = 0.0;
  return true;
}

}  // namespace detail

inline Result solve(const Problem& problem) {
  const std::size_t n = problem.variable_count();
  Result res;

  // Normalize every row to unit max-coefficient and non-negative rhs.
  struct Norm {
    std::vector<double> a;
    double b;
    bool ge;
    std::size_t source;
  };
  std::vector<Norm> rows;
  rows.reserve(problem.rows.size());
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    const auto& row = problem.rows[i];
    double scale = 0.0;
    for (double v : row.coeffs) scale = std::max(scale, std::abs(v));
    bool ge = row.relation == Relation::greater_equal;
    if (scale == 0.0) {
      const bool ok = ge ? 0.0 >= row.rhs : 0.0 <= row.rhs;
      if (!ok) res.conflicting_rows.push_back(i);
      continue;
    }
    Norm nr{row.coeffs, row.rhs / scale, ge, i};
    for (double& v : nr.a) v /= scale;
    if (nr.b < 0.0) {
      for (double& v : nr.a) v = -v;
      nr.b = -nr.b;
      nr.ge = !nr.ge;
    }
    rows.push_back(std::move(nr));
  }
  if (!res.conflicting_rows.empty()) return res;

  const std::size_t m = rows.size();
  std::size_t n_art = 0;
  for (const auto& r : rows) n_art += r.ge ? 1 : 0;
  // Columns: structural | one slack/surplus per row | artificials.
  const std::size_t slack0 = n, art0 = n + m, cols = n + m + n_art;
  detail::Tableau t(m, cols);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> art_row;
  for (std::size_t r = 0, a = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t.at(r, c) = rows[r].a[c];
    t.rhs(r) = rows[r].b;
    if (rows[r].ge) {
      t.at(r, slack0 + r) = -1.0;
      t.at(r, art0 + a) = 1.0;
      basis[r] = art0 + a;
      art_row.push_back(r);
      ++a;
    } else {
      t.at(r, slack0 + r) = 1.0;
      basis[r] = slack0 + r;
    }
  }

  const detail::Tableau initial = t;
  std::vector<bool> allowed(cols, true);
  if (n_art > 0) {
    // Phase 1: maximize -(sum of artificials), expressed in nonbasic terms.
    for (std::size_t r : art_row) {
      for (std::size_t c = 0; c < art0; ++c) t.cost(c) += t.at(r, c);
      t.at(m, cols) += t.rhs(r);
    }
    detail::iterate(t, basis, allowed, 1e-11, res.pivots);
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis[r] >= art0) infeas += t.rhs(r);
    if (infeas > 1e-10) {
      for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= art0 && t.rhs(r) > 1e-10) res.conflicting_rows.push_back(rows[r].source);
      std::sort(res.conflicting_rows.begin(), res.conflicting_rows.end());
      return res;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c) {
        if (std::abs(t.at(r, c)) > 1e-9) {
          t.pivot(r, c);
          basis[r] = c;
          ++res.pivots;
          break;
        }
      }
    }
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = false;
  }

  // Phase 2 cost row: reduced costs of the real objective.
  for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
  double cmax = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    t.cost(c) = problem.objective[c];
    cmax = std::max(cmax, std::abs(problem.objective[c]));
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = basis[r];
    const double cb = b < n ? problem.objective[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(r, c);
  }
  if (!detail::iterate(t, basis, allowed, 1e-11 * std::max(1.0, cmax), res.pivots)) {
    res.status = Status::unbounded;
    return res;
  }

  // Small pivots can leave the final basis slightly off. Rebuild it from
  // the original rows; if a basic value turns negative, dual simplex steps
  // restore feasibility, then primal steps restore optimality.
  const double cost_tol = 1e-11 * std::max(1.0, cmax);
  for (std::size_t round = 0;; ++round) {
    if (round > 4 * (m + cols) || !detail::reinvert(t, initial, basis, problem.objective)) break;
    std::size_t bad = m;
    for (std::size_t r = 0; r < m; ++r)
      if (t.rhs(r) < -1e-14 && (bad == m || t.rhs(r) < t.rhs(bad))) bad = r;
    if (bad == m) {
      std::size_t before = res.pivots;
      if (!detail::iterate(t, basis, allowed, cost_tol, res.pivots)) {
        res.status = Status::unbounded;
        return res;
      }
      if (res.pivots == before) break;
      continue;
    }
    std::size_t enter = cols;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      const double a = t.at(bad, c);
      if (!allowed[c] || a >= -detail::kPivotTol) continue;
      const double ratio = std::min(0.0, t.cost(c)) / a;  // cost <= 0, a < 0
      if (ratio < best) {
        best = ratio;
        enter = c;
      }
    }
    if (enter == cols) {
      res.conflicting_rows.push_back(rows[bad].source);
      return res;
    }
    t.pivot(bad, enter);
    basis[bad] = enter;
    ++res.pivots;
  }

  res.status = Status::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = std::max(0.0, t.rhs(r));
  res.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) res.objective += problem.objective[c] * res.x[c];
  return res;
}

}  // namespace hapcsr::lp
