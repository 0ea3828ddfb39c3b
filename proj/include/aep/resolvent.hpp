#pragma once

// Degree-two sector of the symmetric generator after translation
// reduction: the half-line operator
//   (S f)(x) = f(x+1) - f(x) + 1{x>0} (f(x-1) - f(x)),
// its resolvent and the closed forms built from gamma(lambda).

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "aep/model.hpp"

namespace aep {

/// f on {0, ..., N}; values beyond N are taken as zero except by solvers,
/// which continue them geometrically.
struct ReducedKernel {
  std::vector<double> values;
  double tail_bound = 0.0;

  std::size_t n_trunc() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double at(std::int64_t x) const noexcept {
    return x < 0 || static_cast<std::size_t>(x) >= values.size() ? 0.0 : values[static_cast<std::size_t>(x)];
  }
  /// Largest x with a nonzero value, or -1.
  std::int64_t support() const noexcept;
};

ReducedKernel delta_kernel(std::size_t x, double weight = 1.0);

/// Coefficients f(x, y), x < y, of a degree-two function sum f(x,y) eta^_x eta^_y.
using PairFunction = std::map<std::pair<std::int64_t, std::int64_t>, double>;

/// f_bar(x) = sum_y f(y, y + x + 1).
ReducedKernel reduce(const PairFunction& f);

/// sum_x f(x) g(x).
double inner(const ReducedKernel& f, const ReducedKernel& g);

/// Translation-summed inner product computed directly from the pair coefficients.
double translation_inner(const PairFunction& f, const PairFunction& g);

/// S applied to f; the result has one more site than f.
ReducedKernel s_apply(const ReducedKernel& f);

struct ResolventParams {
  double lambda = 0.0;
  double gamma = 0.0;
  double one_minus_gamma = 0.0;  // kept separately, 1 - gamma ~ sqrt(lambda) for small lambda
  double c1 = 0.0;
  double c2 = 0.0;
};

inline constexpr double kMinLambda = 1e-10;

/// The root in (0,1) of lambda + 2 = gamma + 1/gamma.
ResolventParams gamma_of(double lambda);

/// Closed-form constants for (lambda - S)^{-1} delta_k.
ResolventParams delta_constants(double lambda, std::size_t k);

/// q(x) = gamma^x / (lambda + 1 - gamma) on {0..n}.
ReducedKernel q_kernel(const ResolventParams& params, std::size_t n);

/// max(4 * support, ceil(50 / sqrt(lambda))).
std::size_t default_truncation(double lambda, std::int64_t support);

/// Solves (lambda - S) u = rhs on {0..n_trunc} with u(n_trunc + 1) = gamma u(n_trunc).
ReducedKernel solve_resolvent(double lambda, const ReducedKernel& rhs, std::size_t n_trunc);
ReducedKernel solve_resolvent(double lambda, const ReducedKernel& rhs);

/// c1, c2 from the numeric solution for delta_k, matched at k-1 and k.
struct ExtractedConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double match_residual = 0.0;  // misfit of the two-regime form at k+1
};

ExtractedConstants extract_constants(double lambda, std::size_t k);

struct Prop22Value {
  std::size_t k = 0;
  double lambda = 0.0;
  double closed = 0.0;
  double numeric = 0.0;
  ResolventParams params;
};

/// (lambda - S)^{-1} V(0) - (lambda - S)^{-1} V(k) for V = delta_0 - delta_k,
/// by closed form and by a direct solve; fails with Disagreement beyond 1e-10.
Prop22Value prop22_value(std::size_t k, double lambda);

/// w_bar(x) = (x+1) (p(x+1) - p(-(x+1))).
ReducedKernel current_kernel(const JumpLaw& law);

/// <w, (lambda - S)^{-1} w>.
double s_norm_value(const ReducedKernel& w, double lambda);

struct ScalingFit {
  std::vector<double> lambdas;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log s_norm_value against log lambda.
ScalingFit s_norm_scaling(const ReducedKernel& w, const std::vector<double>& lambdas);

struct SweepRow {
  std::size_t k = 0;
  double lambda = 0.0;
  double value_closed = 0.0;
  double value_numeric = 0.0;
  double gamma = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

std::vector<SweepRow> prop22_sweep(const std::vector<std::size_t>& ks, const std::vector<double>& lambdas);

}  // namespace aep
