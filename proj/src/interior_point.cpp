#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <vector>

#include "greendc/linprog.hpp"

namespace greendc::lp {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double max_step(const Vec& v, const Vec& dv, const std::vector<bool>& active) {
  double step = 1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (active[static_cast<std::size_t>(k)] && dv(k) < 0.0) step = std::min(step, -v(k) / dv(k));
  }
  return step;
}

}  // namespace

Solution solve_interior_point(const LinearProgram& lp, const InteriorPointOptions& options) {
  lp.validate();
  const std::size_t n0 = lp.num_variables();
  const std::size_t mi = lp.inequalities.size();
  const std::size_t m = mi + lp.equalities.size();
  const std::size_t n = n0 + mi;
  const auto N = static_cast<Eigen::Index>(n);
  const auto M = static_cast<Eigen::Index>(m);

  Vec c = Vec::Zero(N), lo(N), hi(N), b(M);
  for (std::size_t k = 0; k < n0; ++k) {
    c(static_cast<Eigen::Index>(k)) = lp.objective[k];
    lo(static_cast<Eigen::Index>(k)) = lp.lower[k];
    hi(static_cast<Eigen::Index>(k)) = lp.upper[k];
  }
  for (std::size_t r = 0; r < mi; ++r) {
    lo(static_cast<Eigen::Index>(n0 + r)) = 0.0;
    hi(static_cast<Eigen::Index>(n0 + r)) = kInfinity;
  }

  // Rows are equilibrated by their largest coefficient.
  std::vector<Eigen::Triplet<double>> triplets;
  auto add_row = [&](std::size_t r, const Row& row, bool with_slack) {
    double scale = with_slack ? 1.0 : 0.0;
    for (const auto& t : row.terms) scale = std::max(scale, std::abs(t.value));
    if (scale == 0.0) scale = 1.0;
    for (const auto& t : row.terms) {
      triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t.index),
                            t.value / scale);
    }
    if (with_slack) {
      triplets.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n0 + r),
                            1.0 / scale);
    }
    b(static_cast<Eigen::Index>(r)) = row.rhs / scale;
  };
  for (std::size_t r = 0; r < mi; ++r) add_row(r, lp.inequalities[r], true);
  for (std::size_t r = 0; r < lp.equalities.size(); ++r) add_row(mi + r, lp.equalities[r], false);
  SparseMatrix A(M, N);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  const SparseMatrix At = A.transpose();

  std::vector<bool> has_lo(n), has_hi(n);
  std::size_t nbounds = 0;
  Vec x(N), zl = Vec::Zero(N), zu = Vec::Zero(N), y = Vec::Zero(M);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    has_lo[k] = std::isfinite(lo(kk));
    has_hi[k] = std::isfinite(hi(kk));
    nbounds += static_cast<std::size_t>(has_lo[k]) + static_cast<std::size_t>(has_hi[k]);
    if (has_lo[k] && has_hi[k]) {
      x(kk) = 0.5 * (lo(kk) + hi(kk));
    } else if (has_lo[k]) {
      x(kk) = lo(kk) + 1.0;
    } else if (has_hi[k]) {
      x(kk) = hi(kk) - 1.0;
    } else {
      x(kk) = 0.0;
    }
    if (has_lo[k]) zl(kk) = 1.0;
    if (has_hi[k]) zu(kk) = 1.0;
  }
  // Degenerate boxes (lo == hi) start strictly inside by a hair.
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (has_lo[k] && has_hi[k] && hi(kk) - lo(kk) < 1e-12) {
      lo(kk) -= 1e-9;
      hi(kk) += 1e-9;
    }
  }

  const double bnorm = 1.0 + b.lpNorm<Eigen::Infinity>();
  const double cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool analyzed = false;
  Eigen::Index analyzed_nnz = -1;

  Vec xl(N), xu(N), theta(N);
  Solution sol;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    sol.iterations = iter;
    for (Eigen::Index k = 0; k < N; ++k) {
      xl(k) = has_lo[static_cast<std::size_t>(k)] ? x(k) - lo(k) : 1.0;
      xu(k) = has_hi[static_cast<std::size_t>(k)] ? hi(k) - x(k) : 1.0;
    }
    const Vec rp = b - A * x;
    const Vec rd = c - At * y - zl + zu;
    double complementarity = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
      if (has_lo[static_cast<std::size_t>(k)]) complementarity += xl(k) * zl(k);
      if (has_hi[static_cast<std::size_t>(k)]) complementarity += xu(k) * zu(k);
    }
    const double mu = nbounds > 0 ? complementarity / static_cast<double>(nbounds) : 0.0;
    const double pobj = c.dot(x);
    double dobj = b.dot(y);
    for (Eigen::Index k = 0; k < N; ++k) {
      if (has_lo[static_cast<std::size_t>(k)]) dobj += lo(k) * zl(k);
      if (has_hi[static_cast<std::size_t>(k)]) dobj -= hi(k) * zu(k);
    }
    const double pinf = rp.lpNorm<Eigen::Infinity>() / bnorm;
    const double dinf = rd.lpNorm<Eigen::Infinity>() / cnorm;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    if (!std::isfinite(pinf) || !std::isfinite(dinf) || !std::isfinite(gap)) break;
    if (pinf < options.tolerance && dinf < options.tolerance && gap < options.tolerance) {
      sol.status = Status::Optimal;
      break;
    }
    if (x.lpNorm<Eigen::Infinity>() > 1e14) {
      sol.status = Status::Unbounded;
      return sol;
    }
    if (y.lpNorm<Eigen::Infinity>() > 1e14) {
      sol.status = Status::Infeasible;
      return sol;
    }

    for (Eigen::Index k = 0; k < N; ++k) {
      double inv = 0.0;
      if (has_lo[static_cast<std::size_t>(k)]) inv += zl(k) / xl(k);
      if (has_hi[static_cast<std::size_t>(k)]) inv += zu(k) / xu(k);
      theta(k) = 1.0 / (inv + 1e-12);
    }
    SparseMatrix normal = A * theta.asDiagonal() * At;
    for (Eigen::Index r = 0; r < M; ++r) normal.coeffRef(r, r) += 1e-12;
    if (!analyzed || normal.nonZeros() != analyzed_nnz) {
      ldlt.analyzePattern(normal);
      analyzed = true;
      analyzed_nnz = normal.nonZeros();
    }
    ldlt.factorize(normal);
    if (ldlt.info() != Eigen::Success) break;

    Vec dx(N), dy(M), dzl(N), dzu(N);
    auto newton = [&](const Vec& rcl, const Vec& rcu) {
      Vec w = rd;
      for (Eigen::Index k = 0; k < N; ++k) {
        if (has_lo[static_cast<std::size_t>(k)]) w(k) -= rcl(k) / xl(k);
        if (has_hi[static_cast<std::size_t>(k)]) w(k) += rcu(k) / xu(k);
      }
      const Vec tw = theta.cwiseProduct(w);
      dy = ldlt.solve(rp + A * tw);
      dx = theta.cwiseProduct(At * dy - w);
      for (Eigen::Index k = 0; k < N; ++k) {
        dzl(k) = has_lo[static_cast<std::size_t>(k)] ? (rcl(k) - zl(k) * dx(k)) / xl(k) : 0.0;
        dzu(k) = has_hi[static_cast<std::size_t>(k)] ? (rcu(k) + zu(k) * dx(k)) / xu(k) : 0.0;
      }
    };
    auto step_lengths = [&](double& ap, double& ad) {
      const Vec ndx = -dx;
      ap = std::min(max_step(xl, dx, has_lo), max_step(xu, ndx, has_hi));
      ad = std::min(max_step(zl, dzl, has_lo), max_step(zu, dzu, has_hi));
    };

    // Predictor.
    Vec rcl = -xl.cwiseProduct(zl);
    Vec rcu = -xu.cwiseProduct(zu);
    newton(rcl, rcu);
    double ap = 1.0, ad = 1.0;
    step_lengths(ap, ad);
    double mu_aff = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
      if (has_lo[static_cast<std::size_t>(k)]) {
        mu_aff += (xl(k) + ap * dx(k)) * (zl(k) + ad * dzl(k));
      }
      if (has_hi[static_cast<std::size_t>(k)]) {
        mu_aff += (xu(k) - ap * dx(k)) * (zu(k) + ad * dzu(k));
      }
    }
    mu_aff = nbounds > 0 ? mu_aff / static_cast<double>(nbounds) : 0.0;
    const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    // Corrector.
    for (Eigen::Index k = 0; k < N; ++k) {
      rcl(k) = sigma * mu - xl(k) * zl(k) - dx(k) * dzl(k);
      rcu(k) = sigma * mu - xu(k) * zu(k) + dx(k) * dzu(k);
    }
    newton(rcl, rcu);
    step_lengths(ap, ad);
    ap = std::min(1.0, 0.995 * ap);
    ad = std::min(1.0, 0.995 * ad);
    x += ap * dx;
    y += ad * dy;
    zl += ad * dzl;
    zu += ad * dzu;
  }
  if (sol.status != Status::Optimal) {
    sol.status = Status::NumericalFailure;
    return sol;
  }
  sol.x.resize(n0);
  for (std::size_t k = 0; k < n0; ++k) {
    sol.x[k] = std::clamp(x(static_cast<Eigen::Index>(k)), lp.lower[k], lp.upper[k]);
  }
  sol.objective = lp.evaluate_objective(sol.x);
  return sol;
}

}  // namespace greendc::lp
