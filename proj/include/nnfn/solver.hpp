#pragma once

// ADMM for the multi-channel nuclear-minus-Frobenius model
//
//   min_X ||W (Y - X)||_F^2 + lambda * (||X||_* - alpha * ||X||_F)
//
// split as X = Z. One iteration is: closed-form X step (W is diagonal),
// singular-value prox Z step, multiplier ascent, rho <- mu * rho.

#include <iosfwd>
#include <limits>
#include <vector>

#include "nnfn/linalg.hpp"
#include "nnfn/noise_model.hpp"

namespace nnfn {

/// Prox output when the largest input is below the threshold t.
///   sparse: the exact minimizer; keeps σ₁ + (α - 1) t on the first entry
///           when that is positive.
///   zero:   always 0, the rule usually quoted for this regularizer. Only
///           optimal for α <= 1 - σ₁ / t.
enum class BelowThreshold { sparse, zero };

struct SolverParams {
  double lambda = 0.86;
  double alpha = 1.9;
  double rho0 = 0.86;
  double mu = 1.001;
  double tau = 1e-7;
  int max_iters = 10;
  BelowThreshold below_threshold = BelowThreshold::sparse;
  /// Evaluate the model objective (one extra SVD) every iteration.
  bool record_objective = false;

  /// Throws InvalidParameter on lambda <= 0, alpha < 0, rho0 <= 0, mu <= 1,
  /// tau <= 0, max_iters < 1 or a non-finite field.
  void validate() const;
};

/// Iterates after k completed iterations.
struct SolverState {
  Matrix x;
  Matrix z;
  Matrix a;
  double rho = 0.0;
  int k = 0;
};

struct IterationRecord {
  int k = 0;                 // iterations completed
  double primal = 0.0;       // ||X_k - Z_k||_F
  double x_change = 0.0;     // ||X_k - X_{k-1}||_F
  double z_change = 0.0;     // ||Z_k - Z_{k-1}||_F
  double multiplier = 0.0;   // ||A_k||_F
  double rho = 0.0;          // penalty used to produce this iterate
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct SolveResult {
  Matrix estimate;  // Z at exit
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;
  /// Iterations where ||A||_F exceeded lambda * sqrt(M). Only possible for
  /// alpha > 2; with alpha <= 2 a violation throws instead.
  int bound_warnings = 0;
};

/// ||W(Y - X)||_F^2 + lambda * (||X||_* - alpha * ||X||_F)
double objective(const Matrix& y, const Matrix& x, const WeightMatrix& w,
                 double lambda, double alpha);

/// argmin_X ||W(Y - X)||_F^2 + <A, X - Z> + rho/2 ||X - Z||_F^2, row block by
/// row block.
Matrix x_update(const Matrix& y, const Matrix& z, const Matrix& a, double rho,
                const WeightMatrix& w);

/// Proximal map of t * (||x||_1 - alpha * ||x||_2) for non-negative,
/// non-increasing input. With z = max(sigma - t, 0) and sigma_1 >= t the
/// result is z * (||z|| + alpha t) / ||z||, or alpha t on the first entry if
/// z = 0. Throws InvalidParameter on unsorted or negative entries, t <= 0 or
/// alpha < 0.
Vector prox_l1_minus_alpha_l2(
    const Vector& sigma, double t, double alpha,
    BelowThreshold below = BelowThreshold::sparse);

/// U diag(prox(sigma, lambda / rho, alpha)) Vᵀ for the SVD of X + A / rho.
Matrix z_update(const Matrix& x, const Matrix& a, double rho, double lambda,
                double alpha, BelowThreshold below = BelowThreshold::sparse);

/// A + rho (X - Z)
Matrix a_update(const Matrix& a, const Matrix& x, const Matrix& z, double rho);

/// All three residuals ||X-Z||, ||dX||, ||dZ|| at most tau (inclusive).
bool stopping_check(const SolverState& state, const SolverState& prev,
                    double tau);

/// Runs from X = Z = A = 0, rho = rho0 until stopping_check holds or
/// max_iters iterations are done. Throws NumericalError on a non-finite
/// iterate (message carries the iteration index).
SolveResult solve(const Matrix& y, const WeightMatrix& w,
                  const SolverParams& params);

/// CSV with header k,x_minus_z,x_change,z_change,multiplier_norm,rho,objective;
/// the objective cell is empty when it was not recorded.
void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord>& trace,
                     bool header = true);

}  // namespace nnfn
