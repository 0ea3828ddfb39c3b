#pragma once

// Laplace transforms of sampled curves, log-log exponent fits and the
// conversions between transform bounds and pointwise bounds.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aep/estimators.hpp"
#include "aep/model.hpp"

namespace aep {

/// f sampled at ascending times; piecewise linear in between.
struct SampledCurve {
  std::vector<double> times;
  std::vector<double> values;
};

/// f(t) ~ c t^a beyond the last sample.
struct PowerTail {
  double c = 0.0;
  double a = 0.0;
};

struct LaplaceValue {
  double value = 0.0;
  double quadrature = 0.0;  // integral over the sampled range
  double tail = 0.0;        // analytic integral beyond it
  double error = 0.0;       // quadrature error + tail sensitivity
};

/// c * integral_T^inf e^{-lambda t} t^a dt.
double power_tail_integral(const PowerTail& tail, double lambda, double horizon);

/// Exact integral of the piecewise-linear interpolant plus the tail. Without
/// a tail model the curve is continued flat and TailDominates is raised when
/// that continuation exceeds half the total.
LaplaceValue laplace_transform(const SampledCurve& f, double lambda, const std::optional<PowerTail>& tail);

/// Adaptive Gauss-Kronrod on [0, horizon] plus the tail.
LaplaceValue laplace_transform(const std::function<double(double)>& f, double horizon, double lambda,
                               const std::optional<PowerTail>& tail);

/// Power law fitted in log-log to the samples with t in [T/10, T].
PowerTail fit_tail(const SampledCurve& f);

struct LaplaceCurve {
  std::vector<double> lambdas;  // decreasing
  std::vector<double> values;
  std::vector<double> errors;
};

LaplaceCurve laplace_curve(const SampledCurve& f, const std::vector<double>& lambdas,
                           const std::optional<PowerTail>& tail);

/// tD(t) with the origin prepended.
SampledCurve time_weighted(const DiffusivityCurve& d);

/// n points log-spaced from hi down to lo.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;  // 95% bootstrap interval for the slope
  double ci_hi = 0.0;
  std::size_t resamples = 0;
};

/// Weighted least squares of log y on log x with a pairs bootstrap. Empty
/// weights mean equal weights.
FitResult exponent_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::vector<double>& weights = {}, std::uint64_t seed = 1,
                       std::size_t resamples = 1000);

struct UpperBound {
  double c2 = 0.0;  // v(t) <= c2 t^beta
  double t0 = 0.0;  // for t > t0
  double beta = 0.0;
};

/// From integral e^{-lambda t} v <= c1 lambda^{-(1+beta)} for lambda < lambda0.
UpperBound tauberian_upper(double c1, double beta, double lambda0);

struct LowerBound {
  enum class Form { Power, PowerLog } form = Form::Power;
  double alpha = 0.0, beta = 0.0;
  double c2 = 0.0, c3 = 0.0;
  double c2_prime = 0.0;   // tail constant, 2 c2
  double c = 1.0;          // the log log t coefficient in the choice of lambda
  double c4 = 0.0;         // asymptotic constant
  bool valid = false;      // c4 > 0 and the remainder vanishes as t grows
  double log_power = 0.0;  // exponent of log t in the bound

  /// lambda chosen at time t.
  double lambda_at(double t) const;
  /// Coefficient of t^beta (log t)^log_power in the bound implied at time t.
  double coefficient_at(double t) const;
  /// The lower bound on v(t).
  double bound_at(double t) const;
};

/// From v <= c2 t^alpha and integral e^{-lambda t} v >= c3 lambda^{-(1+beta)}.
LowerBound tauberian_lower(double c2, double c3, double alpha, double beta, double c = 1.0);

struct VerdictOptions {
  double exponent_lo = -2.45;
  double exponent_hi = -2.25;
  double ratio_bound = 5.0;  // ratio must stay in [1/C, C]
  double fit_lambda_min = 0.0;  // 0: 1 / T_max
  double fit_lambda_max = 1.0 / 50.0;
  double ratio_lambda_min = 1.0 / 800.0;
  double ratio_lambda_max = 1.0;
  std::size_t fit_points = 9;
  std::size_t ratio_points = 13;
  std::uint64_t seed = 1;
};

struct TransformFit {
  std::string label;
  LaplaceCurve transform;
  PowerTail tail;
  FitResult fit;
  bool in_band = false;
};

struct WeakSenseReport {
  TransformFit law;
  TransformFit tasep;
  std::vector<double> ratio_lambdas;
  std::vector<double> ratios;
  double ratio_min = 0.0, ratio_max = 0.0;
  bool ratio_in_band = false;
  bool pass = false;
};

/// Transform exponents of tD(t) for the law and for TASEP and the ratio of
/// the two transforms across lambda.
WeakSenseReport weak_sense_verdict(const DiffusivityCurve& law_curve, const JumpLaw& law,
                                   const DiffusivityCurve& tasep_curve, const VerdictOptions& options = {});

}  // namespace aep
