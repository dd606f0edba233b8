#include "greendc/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace greendc::lp {

std::size_t LinearProgram::add_variable(double cost, double lo, double hi, std::string name) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  names.push_back(std::move(name));
  return objective.size() - 1;
}

void LinearProgram::add_less_equal(std::vector<Term> terms, double rhs) {
  inequalities.push_back({std::move(terms), rhs});
}

void LinearProgram::add_greater_equal(std::vector<Term> terms, double rhs) {
  for (auto& t : terms) t.value = -t.value;
  inequalities.push_back({std::move(terms), -rhs});
}

void LinearProgram::add_equal(std::vector<Term> terms, double rhs) {
  equalities.push_back({std::move(terms), rhs});
}

void LinearProgram::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("bound vectors must match the objective dimension");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(objective[k])) throw std::invalid_argument("non-finite objective");
    if (std::isnan(lower[k]) || std::isnan(upper[k]) || lower[k] > upper[k] ||
        lower[k] == kInfinity || upper[k] == -kInfinity) {
      throw std::invalid_argument("invalid bounds for variable " + std::to_string(k));
    }
  }
  for (const auto* rows : {&inequalities, &equalities}) {
    for (const auto& row : *rows) {
      if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite right-hand side");
      for (const auto& t : row.terms) {
        if (t.index >= n) throw std::invalid_argument("row references unknown variable");
        if (!std::isfinite(t.value)) throw std::invalid_argument("non-finite row coefficient");
      }
    }
  }
}

double LinearProgram::evaluate_objective(const std::vector<double>& x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < objective.size(); ++k) v += objective[k] * x[k];
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < objective.size(); ++k) {
    worst = std::max({worst, lower[k] - x[k], x[k] - upper[k]});
  }
  auto activity = [&](const Row& row) {
    double a = 0.0;
    for (const auto& t : row.terms) a += t.value * x[t.index];
    return a;
  };
  for (const auto& row : inequalities) worst = std::max(worst, activity(row) - row.rhs);
  for (const auto& row : equalities) worst = std::max(worst, std::abs(activity(row) - row.rhs));
  return worst;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical failure";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kCostTolerance = 1e-9;

enum class Mapping { Shift, Flip, Split };

struct ColumnMap {
  Mapping mapping;
  std::size_t column;  // first (or only) tableau column
};

/// Bounded-variable tableau: every column lives in [0, upper], nonbasic
/// columns sit at one of their bounds.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), a_(rows * cols, 0.0), upper_(cols, kInfinity), value_(cols, 0.0),
        at_upper_(cols, false), blocked_(cols, false), basis_(rows, 0), basic_row_(cols, npos) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double& at(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  std::vector<double>& upper() { return upper_; }
  std::vector<double>& value() { return value_; }
  std::vector<bool>& blocked() { return blocked_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  bool is_basic(std::size_t c) const { return basic_row_[c] != npos; }

  void set_basic(std::size_t r, std::size_t c) {
    basis_[r] = c;
    basic_row_[c] = r;
  }

  // Returns Optimal, Unbounded or NumericalFailure (iteration limit).
  Status optimize(const std::vector<double>& cost, std::size_t& iterations) {
    std::vector<double> reduced(cost);
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < n_; ++c) reduced[c] -= cb * at(r, c);
    }
    const std::size_t limit = 100000 + 200 * (m_ + n_);
    for (std::size_t iter = 0; iter < limit; ++iter, ++iterations) {
      std::size_t enter = npos;
      for (std::size_t c = 0; c < n_; ++c) {
        if (is_basic(c) || blocked_[c] || upper_[c] <= 0.0) continue;
        if ((!at_upper_[c] && reduced[c] < -kCostTolerance) ||
            (at_upper_[c] && reduced[c] > kCostTolerance)) {
          enter = c;
          break;
        }
      }
      if (enter == npos) return Status::Optimal;

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      double best = kInfinity;
      std::size_t leave_row = npos;
      bool leave_to_upper = false;
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = at(r, enter);
        if (std::abs(alpha) <= kPivotTolerance) continue;
        const double delta = -dir * alpha;
        const std::size_t b = basis_[r];
        double step;
        bool to_upper;
        if (delta < 0.0) {
          step = std::max(value_[b], 0.0) / -delta;
          to_upper = false;
        } else if (upper_[b] < kInfinity) {
          step = std::max(upper_[b] - value_[b], 0.0) / delta;
          to_upper = true;
        } else {
          continue;
        }
        // Least-index rule among tied leaving candidates.
        if (step < best - 1e-12 ||
            (step <= best + 1e-12 && leave_row != npos && b < basis_[leave_row])) {
          best = std::min(best, step);
          leave_row = r;
          leave_to_upper = to_upper;
        }
      }

      const double flip = upper_[enter];
      if (leave_row == npos && flip == kInfinity) return Status::Unbounded;

      if (flip <= best) {
        apply_step(enter, dir, flip);
        at_upper_[enter] = !at_upper_[enter];
        value_[enter] = at_upper_[enter] ? upper_[enter] : 0.0;
        continue;
      }

      apply_step(enter, dir, best);
      const std::size_t leaving = basis_[leave_row];
      value_[leaving] = leave_to_upper ? upper_[leaving] : 0.0;
      at_upper_[leaving] = leave_to_upper;
      pivot(leave_row, enter, reduced);
    }
    return Status::NumericalFailure;
  }

  void pivot(std::size_t r, std::size_t c, std::vector<double>& reduced) {
    const double p = at(r, c);
    double* prow = &a_[r * n_];
    for (std::size_t k = 0; k < n_; ++k) prow[k] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &a_[i * n_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n_; ++k) row[k] -= f * prow[k];
      row[c] = 0.0;
    }
    const double f = reduced[c];
    if (f != 0.0) {
      for (std::size_t k = 0; k < n_; ++k) reduced[k] -= f * prow[k];
      reduced[c] = 0.0;
    }
    basic_row_[basis_[r]] = npos;
    set_basic(r, c);
    at_upper_[c] = false;
  }

 private:
  void apply_step(std::size_t enter, double dir, double step) {
    if (step == 0.0) return;
    value_[enter] += dir * step;
    for (std::size_t r = 0; r < m_; ++r) {
      const double alpha = at(r, enter);
      if (alpha != 0.0) value_[basis_[r]] -= dir * alpha * step;
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<double> upper_;
  std::vector<double> value_;
  std::vector<bool> at_upper_;
  std::vector<bool> blocked_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> basic_row_;
};

}  // namespace

Solution solve(const LinearProgram& lp) {
  lp.validate();
  const std::size_t nvars = lp.num_variables();
  const std::size_t n_ineq = lp.inequalities.size();
  const std::size_t m = n_ineq + lp.equalities.size();

  // Map every original variable onto nonnegative tableau columns.
  std::vector<ColumnMap> maps(nvars);
  std::vector<double> col_upper;
  for (std::size_t k = 0; k < nvars; ++k) {
    const double lo = lp.lower[k];
    const double hi = lp.upper[k];
    if (lo > -kInfinity) {
      maps[k] = {Mapping::Shift, col_upper.size()};
      col_upper.push_back(hi - lo);
    } else if (hi < kInfinity) {
      maps[k] = {Mapping::Flip, col_upper.size()};
      col_upper.push_back(kInfinity);
    } else {
      maps[k] = {Mapping::Split, col_upper.size()};
      col_upper.push_back(kInfinity);
      col_upper.push_back(kInfinity);
    }
  }
  const std::size_t n_struct = col_upper.size();
  const std::size_t slack0 = n_struct;

  // Row data in tableau-column space.
  std::vector<std::vector<double>> rows(m, std::vector<double>(n_struct + n_ineq, 0.0));
  std::vector<double> rhs(m, 0.0);
  auto load_row = [&](std::size_t r, const Row& row) {
    rhs[r] = row.rhs;
    for (const auto& t : row.terms) {
      const auto& map = maps[t.index];
      switch (map.mapping) {
        case Mapping::Shift:
          rows[r][map.column] += t.value;
          rhs[r] -= t.value * lp.lower[t.index];
          break;
        case Mapping::Flip:
          rows[r][map.column] -= t.value;
          rhs[r] -= t.value * lp.upper[t.index];
          break;
        case Mapping::Split:
          rows[r][map.column] += t.value;
          rows[r][map.column + 1] -= t.value;
          break;
      }
    }
  };
  for (std::size_t r = 0; r < n_ineq; ++r) {
    load_row(r, lp.inequalities[r]);
    rows[r][slack0 + r] = 1.0;
  }
  for (std::size_t r = 0; r < lp.equalities.size(); ++r) load_row(n_ineq + r, lp.equalities[r]);

  std::vector<bool> needs_artificial(m, true);
  for (std::size_t r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) {
      for (double& v : rows[r]) v = -v;
      rhs[r] = -rhs[r];
    }
    if (r < n_ineq && rows[r][slack0 + r] > 0.0) needs_artificial[r] = false;
  }
  const std::size_t n_art =
      static_cast<std::size_t>(std::count(needs_artificial.begin(), needs_artificial.end(), true));
  const std::size_t art0 = n_struct + n_ineq;
  const std::size_t n_cols = art0 + n_art;

  Tableau tab(m, n_cols);
  for (std::size_t c = 0; c < n_struct; ++c) tab.upper()[c] = col_upper[c];
  std::size_t next_art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n_struct + n_ineq; ++c) tab.at(r, c) = rows[r][c];
    std::size_t basic;
    if (needs_artificial[r]) {
      basic = next_art++;
      tab.at(r, basic) = 1.0;
    } else {
      basic = slack0 + r;
    }
    tab.set_basic(r, basic);
    tab.value()[basic] = rhs[r];
  }

  Solution sol;
  if (n_art > 0) {
    std::vector<double> phase1(n_cols, 0.0);
    for (std::size_t c = art0; c < n_cols; ++c) phase1[c] = 1.0;
    const Status s = tab.optimize(phase1, sol.iterations);
    if (s == Status::NumericalFailure) {
      sol.status = s;
      return sol;
    }
    double infeasibility = 0.0;
    double scale = 1.0;
    for (double b : rhs) scale = std::max(scale, std::abs(b));
    for (std::size_t c = art0; c < n_cols; ++c) infeasibility += tab.value()[c];
    if (infeasibility > 1e-9 * scale) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis; rows with no eligible
    // pivot are redundant and keep their artificial pinned at zero.
    std::vector<double> dummy(n_cols, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c) {
        if (!tab.is_basic(c) && std::abs(tab.at(r, c)) > kPivotTolerance) {
          tab.value()[tab.basis()[r]] = 0.0;
          tab.pivot(r, c, dummy);
          break;
        }
      }
    }
    for (std::size_t c = art0; c < n_cols; ++c) {
      tab.upper()[c] = 0.0;
      tab.value()[c] = 0.0;
      tab.blocked()[c] = true;
    }
  }

  std::vector<double> cost(n_cols, 0.0);
  for (std::size_t k = 0; k < nvars; ++k) {
    const auto& map = maps[k];
    switch (map.mapping) {
      case Mapping::Shift: cost[map.column] = lp.objective[k]; break;
      case Mapping::Flip: cost[map.column] = -lp.objective[k]; break;
      case Mapping::Split:
        cost[map.column] = lp.objective[k];
        cost[map.column + 1] = -lp.objective[k];
        break;
    }
  }
  sol.status = tab.optimize(cost, sol.iterations);
  if (sol.status != Status::Optimal) return sol;

  sol.x.resize(nvars);
  const auto& v = tab.value();
  for (std::size_t k = 0; k < nvars; ++k) {
    const auto& map = maps[k];
    switch (map.mapping) {
      case Mapping::Shift: sol.x[k] = lp.lower[k] + v[map.column]; break;
      case Mapping::Flip: sol.x[k] = lp.upper[k] - v[map.column]; break;
      case Mapping::Split: sol.x[k] = v[map.column] - v[map.column + 1]; break;
    }
    sol.x[k] = std::clamp(sol.x[k], lp.lower[k], lp.upper[k]);
  }
  sol.objective = lp.evaluate_objective(sol.x);
  return sol;
}

std::string to_lp_format(const LinearProgram& lp) {
  std::ostringstream os;
  os.precision(17);
  auto name = [&](std::size_t k) {
    if (k < lp.names.size() && !lp.names[k].empty()) return lp.names[k];
    return "x" + std::to_string(k);
  };
  auto write_terms = [&](const std::vector<Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
      if (t.value == 0.0) continue;
      os << (t.value < 0 ? (first ? "-" : " - ") : (first ? "" : " + ")) << std::abs(t.value)
         << ' ' << name(t.index);
      first = false;
    }
    if (first) os << "0 " << name(0);
  };
  os << "Minimize\n obj: ";
  std::vector<Term> obj;
  for (std::size_t k = 0; k < lp.objective.size(); ++k) obj.push_back({k, lp.objective[k]});
  write_terms(obj);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < lp.inequalities.size(); ++r) {
    os << " c" << r << ": ";
    write_terms(lp.inequalities[r].terms);
    os << " <= " << lp.inequalities[r].rhs << '\n';
  }
  for (std::size_t r = 0; r < lp.equalities.size(); ++r) {
    os << " e" << r << ": ";
    write_terms(lp.equalities[r].terms);
    os << " = " << lp.equalities[r].rhs << '\n';
  }
  os << "Bounds\n";
  for (std::size_t k = 0; k < lp.objective.size(); ++k) {
    const double lo = lp.lower[k];
    const double hi = lp.upper[k];
    if (lo == -kInfinity && hi == kInfinity) {
      os << ' ' << name(k) << " free\n";
    } else {
      os << ' ';
      if (lo == -kInfinity) os << "-inf"; else os << lo;
      os << " <= " << name(k) << " <= ";
      if (hi == kInfinity) os << "+inf"; else os << hi;
      os << '\n';
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace greendc::lp
