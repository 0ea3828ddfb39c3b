#include "aep/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aep/errors.hpp"

namespace aep {

std::int64_t ReducedKernel::support() const noexcept {
  for (std::size_t i = values.size(); i-- > 0;) {
    if (values[i] != 0.0) return static_cast<std::int64_t>(i);
  }
  return -1;
}

ReducedKernel delta_kernel(std::size_t x, double weight) {
  ReducedKernel k;
  k.values.assign(x + 1, 0.0);
  k.values[x] = weight;
  return k;
}

ReducedKernel reduce(const PairFunction& f) {
  ReducedKernel out;
  for (const auto& [xy, v] : f) {
    const auto [x, y] = xy;
    if (y <= x) fail(ErrorCode::InvalidConfig, "pair coefficients need x < y");
    const auto gap = static_cast<std::size_t>(y - x - 1);
    if (out.values.size() <= gap) out.values.resize(gap + 1, 0.0);
    out.values[gap] += v;
  }
  return out;
}

double inner(const ReducedKernel& f, const ReducedKernel& g) {
  const std::size_t n = std::min(f.values.size(), g.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += f.values[i] * g.values[i];
  return acc;
}

double translation_inner(const PairFunction& f, const PairFunction& g) {
  double acc = 0.0;
  for (const auto& [ab, fv] : f) {
    for (const auto& [xy, gv] : g) {
      if (ab.second - ab.first == xy.second - xy.first) acc += fv * gv;
    }
  }
  return acc;
}

ReducedKernel s_apply(const ReducedKernel& f) {
  ReducedKernel out;
  const auto n = static_cast<std::int64_t>(f.values.size());
  out.values.resize(f.values.size() + 1);
  for (std::int64_t x = 0; x <= n; ++x) {
    double v = f.at(x + 1) - f.at(x);
    if (x > 0) v += f.at(x - 1) - f.at(x);
    out.values[static_cast<std::size_t>(x)] = v;
  }
  return out;
}

ResolventParams gamma_of(double lambda) {
  if (!(lambda > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda must be positive");
  if (lambda < kMinLambda) {
    fail(ErrorCode::NonPositiveLambda, "lambda " + std::to_string(lambda) + " below the supported minimum 1e-10");
  }
  ResolventParams p;
  p.lambda = lambda;
  const double root = std::sqrt(lambda * (lambda + 4.0));
  const double denom = lambda + 2.0 + root;
  p.gamma = 2.0 / denom;
  p.one_minus_gamma = (lambda + root) / denom;
  return p;
}

ResolventParams delta_constants(double lambda, std::size_t k) {
  ResolventParams p = gamma_of(lambda);
  const double g = p.gamma;
  // 1 - gamma^2 = (1 - gamma)(1 + gamma)
  p.c1 = 2.0 * g / (p.one_minus_gamma * (1.0 + g));
  p.c2 = p.c1 * std::pow(g, 2.0 * static_cast<double>(k) + 1.0);
  return p;
}

ReducedKernel q_kernel(const ResolventParams& params, std::size_t n) {
  ReducedKernel q;
  q.values.resize(n + 1);
  const double denom = params.lambda + params.one_minus_gamma;
  double g = 1.0;
  for (std::size_t x = 0; x <= n; ++x) {
    q.values[x] = g / denom;
    g *= params.gamma;
  }
  q.tail_bound = std::abs(q.values[n]);
  return q;
}

std::size_t default_truncation(double lambda, std::int64_t support) {
  const auto by_support = static_cast<std::size_t>(4 * std::max<std::int64_t>(support, 1));
  const auto by_decay = static_cast<std::size_t>(std::ceil(50.0 / std::sqrt(lambda)));
  return std::max(by_support, by_decay);
}

ReducedKernel solve_resolvent(double lambda, const ReducedKernel& rhs, std::size_t n_trunc) {
  const ResolventParams p = gamma_of(lambda);
  const std::int64_t support = rhs.support();
  if (support > static_cast<std::int64_t>(n_trunc)) {
    fail(ErrorCode::TruncationInsufficient, "truncation below the support of the right-hand side");
  }
  const std::size_t n = n_trunc + 1;

  // Thomas algorithm; sub- and super-diagonals are -1.
  std::vector<double> diag(n, lambda + 2.0), r(n);
  diag[0] = lambda + 1.0;
  if (n == 1) diag[0] -= p.gamma;
  else diag[n - 1] -= p.gamma;
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs.at(static_cast<std::int64_t>(i));
  for (std::size_t i = 1; i < n; ++i) {
    const double m = 1.0 / diag[i - 1];
    diag[i] -= m;
    r[i] += m * r[i - 1];
  }
  ReducedKernel u;
  u.values.resize(n);
  u.values[n - 1] = r[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u.values[i] = (r[i] + u.values[i + 1]) / diag[i];

  double norm = 0.0;
  for (double v : u.values) norm = std::max(norm, std::abs(v));
  const double decay = std::pow(p.gamma, static_cast<double>(static_cast<std::int64_t>(n_trunc) - std::max<std::int64_t>(support, 0)));
  u.tail_bound = norm * decay;
  if (decay > 1e-10) {
    fail(ErrorCode::TruncationInsufficient, "tail factor " + std::to_string(decay) + " exceeds 1e-10 at N = " +
                                                std::to_string(n_trunc));
  }
  return u;
}

ReducedKernel solve_resolvent(double lambda, const ReducedKernel& rhs) {
  gamma_of(lambda);
  return solve_resolvent(lambda, rhs, default_truncation(lambda, rhs.support()));
}

ExtractedConstants extract_constants(double lambda, std::size_t k) {
  if (k < 1) fail(ErrorCode::InvalidConfig, "k must be at least 1");
  const ResolventParams p = gamma_of(lambda);
  const ReducedKernel u = solve_resolvent(lambda, delta_kernel(k));
  const double g = p.gamma;
  const double a = u.at(static_cast<std::int64_t>(k) - 1);
  const double b = u.at(static_cast<std::int64_t>(k));
  // u(k-1) = (c1 g + c2 / g) / 2 and u(k) = (c1 + c2) / 2
  ExtractedConstants c;
  c.c1 = 2.0 * (a - b / g) / (g - 1.0 / g);
  c.c2 = 2.0 * b - c.c1;
  c.match_residual = std::abs(u.at(static_cast<std::int64_t>(k) + 1) - 0.5 * (c.c1 + c.c2) * g);
  return c;
}

Prop22Value prop22_value(std::size_t k, double lambda) {
  if (k < 1) fail(ErrorCode::InvalidConfig, "k must be at least 1");
  Prop22Value out;
  out.k = k;
  out.lambda = lambda;
  out.params = delta_constants(lambda, k);
  const ResolventParams& p = out.params;
  const double kd = static_cast<double>(k);
  const double log_g = std::log1p(-p.one_minus_gamma);
  const double one_minus_gk = -std::expm1(kd * log_g);      // 1 - gamma^k
  const double one_minus_ginvk = -std::expm1(-kd * log_g);  // 1 - gamma^-k
  out.closed = one_minus_gk / (lambda + p.one_minus_gamma) + 0.5 * (p.c1 * one_minus_gk + p.c2 * one_minus_ginvk);

  ReducedKernel v = delta_kernel(k, -1.0);
  v.values[0] = 1.0;
  const ReducedKernel u = solve_resolvent(lambda, v);
  out.numeric = u.at(0) - u.at(static_cast<std::int64_t>(k));

  const double diff = std::abs(out.closed - out.numeric);
  if (!(diff <= 1e-10 * std::max(1.0, std::abs(out.closed)))) {
    fail(ErrorCode::Disagreement, "closed form and solve differ by " + std::to_string(diff) + " at k = " +
                                      std::to_string(k) + ", lambda = " + std::to_string(lambda));
  }
  return out;
}

ReducedKernel current_kernel(const JumpLaw& law) {
  ReducedKernel w;
  const int r = law.range();
  w.values.assign(static_cast<std::size_t>(r), 0.0);
  for (int z = 1; z <= r; ++z) {
    w.values[static_cast<std::size_t>(z - 1)] = z * (law.probability(z) - law.probability(-z));
  }
  return w;
}

double s_norm_value(const ReducedKernel& w, double lambda) {
  return inner(w, solve_resolvent(lambda, w));
}

ScalingFit s_norm_scaling(const ReducedKernel& w, const std::vector<double>& lambdas) {
  if (lambdas.size() < 2) fail(ErrorCode::InsufficientSpan, "scaling fit needs at least two lambdas");
  ScalingFit fit;
  fit.lambdas = lambdas;
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx, ly;
  for (double l : lambdas) {
    const double v = s_norm_value(w, l);
    if (!(v > 0.0)) fail(ErrorCode::SolverFailure, "nonpositive resolvent norm");
    fit.values.push_back(v);
    lx.push_back(std::log(l));
    ly.push_back(std::log(v));
    sx += lx.back();
    sy += ly.back();
  }
  const double n = static_cast<double>(lx.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::InsufficientSpan, "lambda grid has no spread");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

std::vector<SweepRow> prop22_sweep(const std::vector<std::size_t>& ks, const std::vector<double>& lambdas) {
  std::vector<SweepRow> rows;
  for (std::size_t k : ks) {
    for (double l : lambdas) {
      const Prop22Value v = prop22_value(k, l);
      const ExtractedConstants c = extract_constants(l, k);
      rows.push_back({k, l, v.closed, v.numeric, v.params.gamma, c.c1, c.c2});
    }
  }
  return rows;
}

}  // namespace aep
