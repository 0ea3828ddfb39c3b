#include "aep/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "aep/errors.hpp"
#include "aep/rng.hpp"

namespace aep {

namespace {

// integral_0^1 e^{-u s} ds and integral_0^1 s e^{-u s} ds
double phi1(double u) { return u < 1e-8 ? 1.0 - u / 2.0 : -std::expm1(-u) / u; }

double phi2(double u) {
  if (u < 1e-3) return 0.5 - u / 3.0 + u * u / 8.0 - u * u * u / 30.0;
  return (-std::expm1(-u) - u * std::exp(-u)) / (u * u);
}

void check_curve(const SampledCurve& f) {
  if (f.times.size() != f.values.size() || f.times.size() < 2) {
    fail(ErrorCode::InvalidConfig, "sampled curve needs at least two (t, f) pairs");
  }
  for (std::size_t i = 1; i < f.times.size(); ++i) {
    if (!(f.times[i] > f.times[i - 1])) fail(ErrorCode::InvalidConfig, "curve times must be strictly ascending");
  }
  if (f.times.front() < 0.0) fail(ErrorCode::InvalidConfig, "curve times must be nonnegative");
}

// exact integral of e^{-lambda t} times the interpolant through every stride-th sample
double integrate_linear(const SampledCurve& f, double lambda, std::size_t stride) {
  double acc = 0.0;
  std::size_t i = 0;
  const std::size_t last = f.times.size() - 1;
  while (i < last) {
    const std::size_t j = std::min(i + stride, last);
    const double h = f.times[j] - f.times[i];
    const double u = lambda * h;
    acc += std::exp(-lambda * f.times[i]) * h * (f.values[i] * phi1(u) + (f.values[j] - f.values[i]) * phi2(u));
    i = j;
  }
  return acc;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool ok = false;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                      const std::vector<std::size_t>& idx) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i : idx) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  LineFit out;
  if (!(sw > 0.0)) return out;
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i : idx) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300)) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.ok = true;
  return out;
}

}  // namespace

double power_tail_integral(const PowerTail& tail, double lambda, double horizon) {
  if (!(lambda > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda must be positive");
  if (!(tail.a > -1.0)) fail(ErrorCode::InvalidConfig, "tail exponent must exceed -1");
  return tail.c * std::pow(lambda, -(tail.a + 1.0)) * boost::math::tgamma(tail.a + 1.0, lambda * horizon);
}

namespace {

// tail value and its sensitivity to shifting the exponent by 0.1 with the
// amplitude rematched at the horizon
std::pair<double, double> tail_with_sensitivity(const PowerTail& tail, double lambda, double horizon) {
  const double base = power_tail_integral(tail, lambda, horizon);
  const double f_t = tail.c * std::pow(horizon, tail.a);
  double sens = 0.0;
  for (double da : {-0.1, 0.1}) {
    PowerTail alt{0.0, tail.a + da};
    if (!(alt.a > -1.0)) continue;
    alt.c = f_t / std::pow(horizon, alt.a);
    sens = std::max(sens, std::abs(power_tail_integral(alt, lambda, horizon) - base));
  }
  return {base, sens};
}

LaplaceValue finish(double quadrature, double quad_error, double horizon, double last_value, double lambda,
                    const std::optional<PowerTail>& tail) {
  LaplaceValue out;
  out.quadrature = quadrature;
  if (tail) {
    const auto [t, s] = tail_with_sensitivity(*tail, lambda, horizon);
    out.tail = t;
    out.error = quad_error + s;
  } else {
    // flat continuation; a lower bound for nondecreasing f
    out.tail = last_value * std::exp(-lambda * horizon) / lambda;
    out.error = quad_error + std::abs(out.tail);
    const double total = std::abs(quadrature) + std::abs(out.tail);
    if (total > 0.0 && std::abs(out.tail) > 0.5 * total) {
      fail(ErrorCode::TailDominates, "tail beyond T = " + std::to_string(horizon) +
                                         " exceeds half the transform at lambda = " + std::to_string(lambda) +
                                         "; supply a tail model");
    }
  }
  out.value = out.quadrature + out.tail;
  return out;
}

}  // namespace

LaplaceValue laplace_transform(const SampledCurve& f, double lambda, const std::optional<PowerTail>& tail) {
  check_curve(f);
  if (!(lambda > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda must be positive");
  const double fine = integrate_linear(f, lambda, 1);
  const double coarse = f.times.size() > 2 ? integrate_linear(f, lambda, 2) : fine;
  // no Richardson factor: curves like t^a with a < 2 converge slower than h^2 near 0
  return finish(fine, std::abs(fine - coarse), f.times.back(), f.values.back(), lambda, tail);
}

LaplaceValue laplace_transform(const std::function<double(double)>& f, double horizon, double lambda,
                               const std::optional<PowerTail>& tail) {
  if (!(lambda > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda must be positive");
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidConfig, "horizon must be positive");
  double err = 0.0;
  const auto g = [&](double t) { return std::exp(-lambda * t) * f(t); };
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, horizon, 20, 1e-14, &err);
  return finish(q, err, horizon, f(horizon), lambda, tail);
}

PowerTail fit_tail(const SampledCurve& f) {
  check_curve(f);
  const double t_max = f.times.back();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < f.times.size(); ++i) {
    if (f.times[i] >= t_max / 10.0 && f.times[i] > 0.0) {
      if (!(f.values[i] > 0.0)) fail(ErrorCode::InvalidConfig, "tail fit needs positive values");
      x.push_back(std::log(f.times[i]));
      y.push_back(std::log(f.values[i]));
    }
  }
  if (x.size() < 2) fail(ErrorCode::InsufficientSpan, "fewer than two samples in the last decade");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  const LineFit line = weighted_line(x, y, std::vector<double>(x.size(), 1.0), idx);
  if (!line.ok) fail(ErrorCode::InsufficientSpan, "tail samples have no spread");
  return {std::exp(line.intercept), line.slope};
}

LaplaceCurve laplace_curve(const SampledCurve& f, const std::vector<double>& lambdas,
                           const std::optional<PowerTail>& tail) {
  LaplaceCurve out;
  out.lambdas = lambdas;
  std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());
  for (double l : out.lambdas) {
    const LaplaceValue v = laplace_transform(f, l, tail);
    out.values.push_back(v.value);
    out.errors.push_back(v.error);
  }
  return out;
}

SampledCurve time_weighted(const DiffusivityCurve& d) {
  SampledCurve f;
  if (d.times.empty() || d.times.front() > 0.0) {
    f.times.push_back(0.0);
    f.values.push_back(0.0);
  }
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    f.times.push_back(d.times[i]);
    f.values.push_back(d.times[i] * d.values[i].value);
  }
  return f;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) fail(ErrorCode::InvalidConfig, "bad log grid");
  if (n == 1) return {hi};
  std::vector<double> g(n);
  const double a = std::log(hi), b = std::log(lo);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = hi;
  g.back() = lo;
  return g;
}

FitResult exponent_fit(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& weights,
                       std::uint64_t seed, std::size_t resamples) {
  const std::size_t n = xs.size();
  if (ys.size() != n || (!weights.empty() && weights.size() != n)) {
    fail(ErrorCode::InvalidConfig, "fit inputs differ in length");
  }
  if (n < 4) fail(ErrorCode::InsufficientSpan, "exponent fit needs at least 4 points");
  std::vector<double> lx(n), ly(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) fail(ErrorCode::InvalidConfig, "log-log fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    if (!weights.empty()) {
      if (!(weights[i] >= 0.0)) fail(ErrorCode::InvalidConfig, "weights must be nonnegative");
      w[i] = weights[i];
    }
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  if (*xmax < 10.0 * *xmin) fail(ErrorCode::InsufficientSpan, "exponent fit needs at least one decade");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const LineFit full = weighted_line(lx, ly, w, idx);
  if (!full.ok) fail(ErrorCode::InsufficientSpan, "degenerate fit");
  FitResult out;
  out.slope = full.slope;
  out.intercept = full.intercept;

  Philox4x32 rng = make_stream(seed, 0, StreamDomain::Bootstrap);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng.bounded(n));
    const LineFit b = weighted_line(lx, ly, w, idx);
    if (b.ok) slopes.push_back(b.slope);
  }
  out.resamples = slopes.size();
  if (slopes.empty()) {
    out.ci_lo = out.ci_hi = out.slope;
    return out;
  }
  std::sort(slopes.begin(), slopes.end());
  const auto pick = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(slopes.size() - 1) + 0.5));
    return slopes[std::min(k, slopes.size() - 1)];
  };
  out.ci_lo = pick(0.025);
  out.ci_hi = pick(0.975);
  return out;
}

UpperBound tauberian_upper(double c1, double beta, double lambda0) {
  if (!(c1 > 0.0) || !(beta >= 0.0) || !(lambda0 > 0.0)) {
    fail(ErrorCode::InvalidConfig, "tauberian_upper needs c1 > 0, beta >= 0, lambda0 > 0");
  }
  // e^{-1} v(t) <= integral_0^inf e^{-s} v(ts) ds <= c1 t^beta for t > 1/lambda0
  return {std::exp(1.0) * c1, 1.0 / lambda0, beta};
}

double LowerBound::lambda_at(double t) const {
  if (form == Form::Power) return 1.0 / t;
  const double lt = std::log(t);
  return (1.0 + (alpha - beta) * (lt + c * std::log(lt))) / t;
}

double LowerBound::coefficient_at(double t) const {
  if (form == Form::Power) return c3 - c2_prime / std::exp(1.0);
  const double lt = std::log(t);
  const double scaled = 1.0 + (alpha - beta) * (lt + c * std::log(lt));  // lambda t
  // c3 lambda^{-(1+beta)} <= t v(t) + c2' lambda^{-1} e^{-lambda t} t^alpha, divided by t^{1+beta} (log t)^{-(1+beta)}
  return c3 * std::pow(lt / scaled, 1.0 + beta) -
         c2_prime * std::exp(-1.0) * std::pow(lt, 1.0 + beta - c * (alpha - beta)) / scaled;
}

double LowerBound::bound_at(double t) const {
  return coefficient_at(t) * std::pow(t, beta) * std::pow(std::log(t), log_power);
}

LowerBound tauberian_lower(double c2, double c3, double alpha, double beta, double c) {
  if (!(beta > 0.0) || !(c2 > 0.0) || !(c3 > 0.0)) {
    fail(ErrorCode::InvalidConfig, "tauberian_lower needs c2, c3, beta > 0");
  }
  if (alpha < beta) fail(ErrorCode::BadOrder, "alpha must be at least beta");
  LowerBound lb;
  lb.alpha = alpha;
  lb.beta = beta;
  lb.c2 = c2;
  lb.c3 = c3;
  lb.c = c;
  // integral_t^inf e^{-lambda s} c2 s^alpha ds <= 2 c2 lambda^{-1} e^{-lambda t} t^alpha once lambda t >= 2 alpha
  lb.c2_prime = 2.0 * c2;
  if (alpha == beta) {
    lb.form = LowerBound::Form::Power;
    lb.log_power = 0.0;
    lb.c4 = c3 - lb.c2_prime / std::exp(1.0);
    lb.valid = lb.c4 > 0.0 && alpha <= 0.5;
  } else {
    lb.form = LowerBound::Form::PowerLog;
    lb.log_power = -(1.0 + beta);
    lb.c4 = c3 * std::pow(alpha - beta, -(1.0 + beta));
    lb.valid = c * (alpha - beta) > beta;
  }
  return lb;
}

namespace {

TransformFit transform_fit(const std::string& label, const DiffusivityCurve& curve, const std::vector<double>& lambdas,
                           const VerdictOptions& o) {
  TransformFit out;
  out.label = label;
  const SampledCurve f = time_weighted(curve);
  out.tail = fit_tail(f);
  out.transform = laplace_curve(f, lambdas, out.tail);
  out.fit = exponent_fit(out.transform.lambdas, out.transform.values, {}, o.seed);
  out.in_band = out.fit.slope >= o.exponent_lo && out.fit.slope <= o.exponent_hi;
  return out;
}

}  // namespace

WeakSenseReport weak_sense_verdict(const DiffusivityCurve& law_curve, const JumpLaw& law,
                                   const DiffusivityCurve& tasep_curve, const VerdictOptions& o) {
  if (law.drift_zero()) fail(ErrorCode::DriftZero, "weak-sense comparison needs a law with nonzero drift");
  if (tasep_curve.times.empty()) fail(ErrorCode::GridMismatch, "no TASEP baseline curve");
  if (law_curve.times != tasep_curve.times) fail(ErrorCode::GridMismatch, "law and TASEP curves use different grids");
  if (law_curve.values.size() != law_curve.times.size() || tasep_curve.values.size() != tasep_curve.times.size()) {
    fail(ErrorCode::GridMismatch, "curve values do not match their time grid");
  }
  const double t_max = law_curve.times.back();
  const double fit_lo = o.fit_lambda_min > 0.0 ? o.fit_lambda_min : 1.0 / t_max;
  if (!(fit_lo < o.fit_lambda_max)) fail(ErrorCode::InvalidConfig, "empty lambda range for the exponent fit");
  const auto fit_grid = log_grid(fit_lo, o.fit_lambda_max, o.fit_points);

  WeakSenseReport r;
  r.law = transform_fit(law.to_string(), law_curve, fit_grid, o);
  r.tasep = transform_fit("TASEP", tasep_curve, fit_grid, o);

  r.ratio_lambdas = log_grid(o.ratio_lambda_min, o.ratio_lambda_max, o.ratio_points);
  const SampledCurve fa = time_weighted(law_curve), fb = time_weighted(tasep_curve);
  const auto la = laplace_curve(fa, r.ratio_lambdas, r.law.tail);
  const auto lb = laplace_curve(fb, r.ratio_lambdas, r.tasep.tail);
  r.ratio_lambdas = la.lambdas;
  for (std::size_t i = 0; i < la.values.size(); ++i) r.ratios.push_back(la.values[i] / lb.values[i]);
  r.ratio_min = *std::min_element(r.ratios.begin(), r.ratios.end());
  r.ratio_max = *std::max_element(r.ratios.begin(), r.ratios.end());
  r.ratio_in_band = r.ratio_min >= 1.0 / o.ratio_bound && r.ratio_max <= o.ratio_bound;
  r.pass = r.law.in_band && r.ratio_in_band;
  return r;
}

}  // namespace aep
