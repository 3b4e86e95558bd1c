#include "nnfn/solver.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "nnfn/errors.hpp"
#include "nnfn/simd/kernels.hpp"

namespace nnfn {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidParameter(std::string(what) + ": dimension mismatch (" +
                           std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()) + ")");
  }
}

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidParameter(std::string(name) + " must be finite and > 0");
  }
}

}  // namespace

void SolverParams::validate() const {
  require_positive(lambda, "lambda");
  require_positive(rho0, "rho0");
  require_positive(tau, "tau");
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidParameter("alpha must be finite and >= 0");
  }
  if (!std::isfinite(mu) || mu <= 1.0) {
    throw InvalidParameter("mu must be finite and > 1");
  }
  if (max_iters < 1) throw InvalidParameter("max_iters must be >= 1");
}

double objective(const Matrix& y, const Matrix& x, const WeightMatrix& w,
                 double lambda, double alpha) {
  require_same_shape(y, x, "objective");
  const double fidelity = w.apply(y - x).squaredNorm();
  return fidelity + lambda * (nuclear_norm(x) - alpha * x.norm());
}

Matrix x_update(const Matrix& y, const Matrix& z, const Matrix& a, double rho,
                const WeightMatrix& w) {
  require_positive(rho, "rho");
  require_same_shape(y, z, "x_update");
  require_same_shape(y, a, "x_update");
  if (y.rows() != w.rows()) {
    throw InvalidParameter("x_update: Y has " + std::to_string(y.rows()) +
                           " rows, W expects " + std::to_string(w.rows()));
  }
  const auto& k = simd::kernels();
  const Eigen::Index block = w.block_size();
  const double half_rho = 0.5 * rho;
  Matrix x(y.rows(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (int c = 0; c < 3; ++c) {
      const Eigen::Index off = c * block;
      k.blend_rows(y.col(j).data() + off, z.col(j).data() + off,
                   a.col(j).data() + off, x.col(j).data() + off,
                   static_cast<std::size_t>(block), w.gram(c), half_rho);
    }
  }
  return x;
}

Vector prox_l1_minus_alpha_l2(const Vector& sigma, double t, double alpha,
                              BelowThreshold below) {
  require_positive(t, "prox threshold");
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidParameter("alpha must be finite and >= 0");
  }
  const Eigen::Index n = sigma.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(sigma(i)) || sigma(i) < 0.0) {
      throw InvalidParameter("prox input must be finite and non-negative");
    }
    if (i > 0 && sigma(i) > sigma(i - 1)) {
      throw InvalidParameter("prox input must be sorted non-increasing");
    }
  }

  Vector out = Vector::Zero(n);
  if (n == 0) return out;
  if (sigma(0) < t) {
    // Only a 1-sparse point can beat zero here: along the first axis the
    // objective is 1/2 (x - s)^2 + (1 - alpha) t x.
    const double lead = sigma(0) + (alpha - 1.0) * t;
    if (below == BelowThreshold::sparse && lead > 0.0) out(0) = lead;
    return out;
  }
  const Vector z = (sigma.array() - t).max(0.0).matrix();
  const double norm = z.norm();
  if (norm > 0.0) {
    out = ((norm + alpha * t) / norm) * z;
  } else {
    out(0) = alpha * t;
  }
  return out;
}

Matrix z_update(const Matrix& x, const Matrix& a, double rho, double lambda,
                double alpha, BelowThreshold below) {
  require_positive(rho, "rho");
  require_positive(lambda, "lambda");
  require_same_shape(x, a, "z_update");
  const Matrix q = x + a / rho;
  const ThinSvd svd = thin_svd(q);
  const Vector shrunk = prox_l1_minus_alpha_l2(svd.s, lambda / rho, alpha, below);
  Eigen::Index rank = 0;
  while (rank < shrunk.size() && shrunk(rank) > 0.0) ++rank;
  if (rank == 0) return Matrix::Zero(x.rows(), x.cols());
  return svd.u.leftCols(rank) * shrunk.head(rank).asDiagonal() *
         svd.vt.topRows(rank);
}

Matrix a_update(const Matrix& a, const Matrix& x, const Matrix& z, double rho) {
  require_same_shape(a, x, "a_update");
  require_same_shape(a, z, "a_update");
  Matrix out = a;
  simd::kernels().multiplier_step(out.data(), x.data(), z.data(),
                                  static_cast<std::size_t>(out.size()), rho);
  return out;
}

bool stopping_check(const SolverState& state, const SolverState& prev,
                    double tau) {
  return (state.x - state.z).norm() <= tau &&
         (state.x - prev.x).norm() <= tau && (state.z - prev.z).norm() <= tau;
}

SolveResult solve(const Matrix& y, const WeightMatrix& w,
                  const SolverParams& params) {
  params.validate();
  if (y.rows() != w.rows()) {
    throw InvalidParameter("solve: Y has " + std::to_string(y.rows()) +
                           " rows, W expects " + std::to_string(w.rows()));
  }
  if (!y.allFinite()) throw InvalidParameter("solve: Y contains NaN/Inf");

  const auto& kern = simd::kernels();
  const double bound =
      params.lambda * std::sqrt(static_cast<double>(y.cols())) + 1e-9;

  SolverState state{Matrix::Zero(y.rows(), y.cols()),
                    Matrix::Zero(y.rows(), y.cols()),
                    Matrix::Zero(y.rows(), y.cols()), params.rho0, 0};
  SolveResult result;
  result.trace.reserve(static_cast<std::size_t>(params.max_iters));

  while (state.k < params.max_iters) {
    const double rho = state.rho;
    Matrix x = x_update(y, state.z, state.a, rho, w);
    Matrix z = z_update(x, state.a, rho, params.lambda, params.alpha,
                        params.below_threshold);
    kern.multiplier_step(state.a.data(), x.data(), z.data(),
                         static_cast<std::size_t>(state.a.size()), rho);
    state.rho = params.mu * rho;
    ++state.k;

    if (!x.allFinite() || !z.allFinite() || !state.a.allFinite()) {
      throw NumericalError("solve: non-finite iterate at iteration " +
                           std::to_string(state.k));
    }

    IterationRecord rec;
    rec.k = state.k;
    rec.primal = (x - z).norm();
    rec.x_change = (x - state.x).norm();
    rec.z_change = (z - state.z).norm();
    rec.multiplier = state.a.norm();
    rec.rho = rho;
    if (params.record_objective) {
      rec.objective = objective(y, z, w, params.lambda, params.alpha);
    }
    result.trace.push_back(rec);

    state.x = std::move(x);
    state.z = std::move(z);

    if (rec.multiplier > bound) {
      if (params.alpha <= 2.0) {
        throw NumericalError(
            "solve: multiplier norm " + std::to_string(rec.multiplier) +
            " exceeds lambda*sqrt(M)=" + std::to_string(bound) +
            " at iteration " + std::to_string(state.k));
      }
      ++result.bound_warnings;
    }

    if (rec.primal <= params.tau && rec.x_change <= params.tau &&
        rec.z_change <= params.tau) {
      result.converged = true;
      break;
    }
  }

  result.iterations = state.k;
  result.estimate = std::move(state.z);
  return result;
}

void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& trace, bool header) {
  if (header) out << "k,x_minus_z,x_change,z_change,multiplier_norm,rho,objective\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : trace) {
    out << r.k << ',' << r.primal << ',' << r.x_change << ',' << r.z_change
        << ',' << r.multiplier << ',' << r.rho << ',';
    if (!std::isnan(r.objective)) out << r.objective;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace nnfn
