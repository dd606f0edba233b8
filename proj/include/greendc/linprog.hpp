#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace greendc::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Term {
  std::size_t index;
  double value;
};

/// Sparse row `sum(terms) (<= or =) rhs`.
struct Row {
  std::vector<Term> terms;
  double rhs = 0.0;
};

/// minimize c.x  s.t.  inequality rows (a.x <= b), equality rows (a.x = b),
/// lower <= x <= upper (either side may be infinite).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> inequalities;
  std::vector<Row> equalities;
  std::vector<std::string> names;  // optional, used by the text dump

  std::size_t num_variables() const { return objective.size(); }

  std::size_t add_variable(double cost, double lo, double hi, std::string name = {});
  void add_less_equal(std::vector<Term> terms, double rhs);
  void add_greater_equal(std::vector<Term> terms, double rhs);
  void add_equal(std::vector<Term> terms, double rhs);

  /// Throws std::invalid_argument on size mismatches, out-of-range indices,
  /// non-finite coefficients or inverted bounds.
  void validate() const;

  double evaluate_objective(const std::vector<double>& x) const;

  /// Largest violation of any row or bound at x (0 when feasible).
  double max_violation(const std::vector<double>& x) const;
};

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(Status status);

struct Solution {
  Status status = Status::NumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Dense two-phase bounded-variable simplex with the least-index pivot rule.
/// Returns a vertex when Optimal. Deterministic for a fixed input.
Solution solve(const LinearProgram& lp);

struct InteriorPointOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

/// Sparse primal-dual (Mehrotra predictor-corrector) solver for large LPs.
/// The result is optimal to `tolerance` but is generally not a vertex.
Solution solve_interior_point(const LinearProgram& lp, const InteriorPointOptions& options = {});

/// Plain-text dump in CPLEX LP style for cross-checking with external solvers.
std::string to_lp_format(const LinearProgram& lp);

}  // namespace greendc::lp
