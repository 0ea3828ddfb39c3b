#include "aep/estimators.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "aep/errors.hpp"

namespace aep {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  if (v.empty()) fail(ErrorCode::EmptyEnsemble, "no samples");
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

Estimate to_estimate(const MeanSe& m) { return {m.mean, m.se}; }

double drift_center(Density density, const JumpLaw& law, double t) {
  return (1.0 - 2.0 * density.rho) * law.drift() * t;
}

bool has_conditioning(const TrackEnsemble& e, std::int64_t site, bool occupied) {
  return std::any_of(e.conditioning.begin(), e.conditioning.end(),
                     [&](const Conditioning& c) { return c.site == site && c.occupied == occupied; });
}

}  // namespace

std::size_t TrackEnsemble::time_index(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  fail(ErrorCode::InvalidConfig, "time " + std::to_string(t) + " is not on the ensemble grid");
}

TrackEnsemble second_class_ensemble(const SimConfig& config, const std::vector<double>& times,
                                    const EnsembleSpec& spec) {
  SimConfig c = config;
  if (c.horizon < (times.empty() ? 0.0 : times.back())) c.horizon = times.back();
  c = resolve(c);
  TrackEnsemble out;
  out.times = times;
  out.conditioning = c.conditioning;
  out.seed = spec.seed;
  out.positions = run_replicas<std::vector<std::int64_t>>(spec, [&](std::size_t, Philox4x32& rng) {
    return second_class_run(c, times, rng).positions;
  });
  return out;
}

TwoPointField two_point(const TrackEnsemble& tracks, Density density, std::size_t time_index,
                        std::int64_t ring_size) {
  const std::size_t n = tracks.replicas();
  if (n == 0) fail(ErrorCode::EmptyEnsemble, "two_point needs at least one replica");
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& p : tracks.positions) {
    std::int64_t x = p.at(time_index);
    if (ring_size > 0) x = ((x % ring_size) + ring_size) % ring_size;
    ++counts[x];
  }
  TwoPointField field;
  field.t = tracks.times.at(time_index);
  field.replicas = n;
  const double nd = static_cast<double>(n);
  for (const auto& [x, c] : counts) {
    const double p = static_cast<double>(c) / nd;
    field.values[x] = {density.chi * p, density.chi * std::sqrt(p * (1.0 - p) / nd)};
  }
  return field;
}

DiffusivityCurve diffusivity_variance(const TrackEnsemble& tracks, Density density, const JumpLaw& law) {
  const std::size_t n = tracks.replicas();
  if (n == 0) fail(ErrorCode::EmptyEnsemble, "diffusivity_variance needs replicas");
  if (!tracks.conditioning.empty()) fail(ErrorCode::NotStationary, "variance route needs an unconditioned ensemble");
  DiffusivityCurve curve;
  curve.method = "variance";
  curve.replicas = n;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < tracks.times.size(); ++i) {
    const double t = tracks.times[i];
    if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "D(t) is undefined at t = 0");
    const double m = drift_center(density, law, t);
    double m2 = 0.0, m4 = 0.0;
    for (const auto& p : tracks.positions) {
      const double y = static_cast<double>(p[i]) - m;
      const double y2 = y * y;
      m2 += y2;
      m4 += y2 * y2;
    }
    m2 /= nd;
    m4 /= nd;
    const double var_of_y2 = std::max(0.0, m4 - m2 * m2);
    curve.times.push_back(t);
    curve.values.push_back({m2 / t, std::sqrt(var_of_y2 / std::max(1.0, nd - 1.0)) / t});
  }
  return curve;
}

Estimate green_kubo_D(const std::vector<double>& q_values, Density density, const JumpLaw& law, double t,
                      std::int64_t ring_size, std::size_t batches) {
  if (q_values.empty()) fail(ErrorCode::EmptyEnsemble, "green_kubo_D needs replicas");
  if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "D(t) is undefined at t = 0");
  const std::size_t n = q_values.size();
  batches = std::clamp<std::size_t>(batches, 1, n);
  const double scale = density.chi / (t * static_cast<double>(ring_size));
  double total = 0.0;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t first = b * n / batches, last = (b + 1) * n / batches;
    double s = 0.0;
    for (std::size_t r = first; r < last; ++r) s += q_values[r];
    total += s;
    means[b] = s / static_cast<double>(last - first);
  }
  Estimate e;
  e.value = law.second_moment() + scale * total / static_cast<double>(n);
  if (batches > 1) e.se = scale * mean_se(means).se;
  return e;
}

DiffusivityCurve green_kubo_curve(const SimConfig& config, const std::vector<double>& times,
                                  const EnsembleSpec& spec) {
  SimConfig c = config;
  if (c.horizon < (times.empty() ? 0.0 : times.back())) c.horizon = times.back();
  c = resolve(c);
  const auto q = run_replicas<std::vector<double>>(
      spec, [&](std::size_t, Philox4x32& rng) { return current_correlation_run(c, times, rng); });
  DiffusivityCurve curve;
  curve.method = "green_kubo";
  curve.replicas = spec.replicas;
  std::vector<double> column(q.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t r = 0; r < q.size(); ++r) column[r] = q[r][i];
    curve.times.push_back(times[i]);
    curve.values.push_back(green_kubo_D(column, c.density, c.law, times[i], c.ring_size, spec.batches));
  }
  return curve;
}

std::int64_t height_half_width(double t, std::int64_t minimum) {
  const auto w = static_cast<std::int64_t>(std::ceil(t + 6.0 * std::sqrt(t + 1.0))) + 4;
  return std::max(w, minimum);
}

HeightEnsemble height_ensemble(const SimConfig& config, const std::vector<double>& times, const EnsembleSpec& spec,
                               std::int64_t min_half_width, std::int64_t origin_stride) {
  if (!config.conditioning.empty()) fail(ErrorCode::NotStationary, "height statistics need an unconditioned run");
  if (origin_stride < 1) fail(ErrorCode::InvalidConfig, "origin stride must be positive");
  SimConfig c = config;
  if (c.horizon < (times.empty() ? 0.0 : times.back())) c.horizon = times.back();
  c = resolve(c);

  HeightEnsemble out;
  out.density = c.density;
  HeightLayout& lay = out.layout;
  lay.times = times;
  for (double t : times) {
    const std::int64_t w = height_half_width(t, min_half_width);
    const auto center = static_cast<std::int64_t>(std::floor(drift_center(c.density, c.law, t)));
    HeightWindow win{std::min(center - w, -min_half_width), std::max(center + w, min_half_width)};
    lay.offsets.push_back(lay.width);
    lay.windows.push_back(win);
    lay.width += HeightLayout::kSlots * win.size() + HeightLayout::kScalars;
  }
  const std::size_t violations_slot = lay.width;
  const std::size_t checks_slot = lay.width + 1;
  const std::size_t width = lay.width + 2;

  // window feasibility is checked once up front so a bad window fails fast
  {
    RingState probe(c.ring_size);
    probe.enable_bond_counters();
    for (const auto& w : lay.windows) HeightObserver(probe, w);
  }

  out.sums = run_batched(spec, width, [&](std::size_t, Philox4x32& rng, double* acc) {
    RingState state = init_stationary(c, rng);
    state.enable_bond_counters();
    const std::int64_t L = state.size();
    std::vector<std::int64_t> h, n, eta_prefix(static_cast<std::size_t>(L + 1));
    std::vector<double> local;
    // observers hold eta(0); build them before any motion
    std::vector<HeightObserver> observers;
    observers.reserve(times.size());
    for (const auto& win : lay.windows) observers.emplace_back(state, win);

    std::size_t origins = 0;
    for (std::int64_t y = 0; y < L; y += origin_stride) ++origins;
    const double inv_origins = 1.0 / static_cast<double>(origins);

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      advance(state, c.law, times[ti], rng);
      const HeightObserver& obs = observers[ti];
      const HeightWindow& win = lay.windows[ti];
      const std::size_t size = win.size();
      local.assign(HeightLayout::kSlots * size + HeightLayout::kScalars, 0.0);
      for (std::int64_t k = 0; k < L; ++k) eta_prefix[k + 1] = eta_prefix[k] + state.occupied_by_first_class(k);
      // sum of eta over offsets [a, b] from origin y, any a <= b with b - a < L
      const auto eta_sum = [&](std::int64_t y, std::int64_t a, std::int64_t b) {
        const std::int64_t lo = state.wrap(y + a);
        const std::int64_t len = b - a + 1;
        if (lo + len <= L) return eta_prefix[lo + len] - eta_prefix[lo];
        return (eta_prefix[L] - eta_prefix[lo]) + eta_prefix[lo + len - L];
      };
      for (std::int64_t y = 0; y < L; y += origin_stride) {
        obs.heights(state, y, h);
        obs.currents(state, y, n);
        const double n0 = static_cast<double>(state.net_current(y));
        for (std::int64_t x = win.lo; x <= win.hi; ++x) {
          const std::size_t i = static_cast<std::size_t>(x - win.lo);
          const double hv = static_cast<double>(h[i]);
          const double nv = static_cast<double>(n[i]);
          const double ev = state.occupied_by_first_class(y + x) ? 1.0 : 0.0;
          const std::int64_t ax = x < 0 ? -x : x;
          const double es = ax == 0 ? 0.0 : static_cast<double>(eta_sum(y, -ax + 1, ax));
          local[HeightLayout::H * size + i] += hv;
          local[HeightLayout::H2 * size + i] += hv * hv;
          local[HeightLayout::N0H * size + i] += n0 * hv;
          local[HeightLayout::N * size + i] += nv;
          local[HeightLayout::N0N * size + i] += n0 * nv;
          local[HeightLayout::Eta * size + i] += ev;
          local[HeightLayout::N0Eta * size + i] += n0 * ev;
          local[HeightLayout::E * size + i] += es;
          local[HeightLayout::N0E * size + i] += n0 * es;
        }
        local[HeightLayout::kSlots * size + HeightLayout::N0] += n0;
        local[HeightLayout::kSlots * size + HeightLayout::N02] += n0 * n0;
        acc[violations_slot] += static_cast<double>(obs.identity_violations(state, y));
        acc[checks_slot] += 1.0;
      }
      double* block = acc + lay.offsets[ti];
      for (std::size_t k = 0; k < local.size(); ++k) block[k] += local[k] * inv_origins;
    }
  });

  const auto total = [&](std::size_t slot) {
    double s = 0.0;
    for (const auto& b : out.sums.sums) s += b[slot];
    return s;
  };
  out.identity_violations = static_cast<std::size_t>(total(violations_slot));
  out.identity_checks = static_cast<std::size_t>(total(checks_slot));
  return out;
}

namespace {

// Moments of one time block, read from a vector of pooled or batch means.
struct BlockView {
  const HeightLayout& lay;
  std::size_t ti;
  const std::vector<double>& m;

  double get(HeightLayout::Slot s, std::int64_t x) const { return m[lay.index(ti, s, x)]; }
  double n0() const { return m[lay.scalar(ti, HeightLayout::N0)]; }
  double var_h(std::int64_t x) const {
    const double a = get(HeightLayout::H, x);
    return get(HeightLayout::H2, x) - a * a;
  }
  // Var M_t(x) = 4 chi |x| holds exactly under the product measure, which
  // removes the dominant noise of the sample variance.
  double var_h_cv(std::int64_t x, double chi) const {
    const double n0 = this->n0();
    const double var_n0 = m[lay.scalar(ti, HeightLayout::N02)] - n0 * n0;
    const double cov = get(HeightLayout::N0H, x) - n0 * get(HeightLayout::H, x);
    return 4.0 * chi * static_cast<double>(x < 0 ? -x : x) - 4.0 * var_n0 + 4.0 * cov;
  }
  double cov_nn(std::int64_t x) const { return get(HeightLayout::N0N, x) - n0() * get(HeightLayout::N, x); }
  double cov_neta(std::int64_t x) const { return get(HeightLayout::N0Eta, x) - n0() * get(HeightLayout::Eta, x); }
  double cov_ne(std::int64_t x) const { return get(HeightLayout::N0E, x) - n0() * get(HeightLayout::E, x); }
};

}  // namespace

HeightField height_field(const HeightEnsemble& ens, std::size_t ti) {
  const HeightLayout& lay = ens.layout;
  const HeightWindow win = lay.windows.at(ti);
  HeightField f;
  f.t = lay.times[ti];
  f.window = win;
  const auto per_site = [&](auto member) {
    return batch_estimates(ens.sums, [&](const std::vector<double>& m) {
      const BlockView view{lay, ti, m};
      std::vector<double> out;
      for (std::int64_t x = win.lo; x <= win.hi; ++x) out.push_back((view.*member)(x));
      return out;
    });
  };
  f.v = per_site(&BlockView::var_h);
  f.v_cv = batch_estimates(ens.sums, [&](const std::vector<double>& m) {
    const BlockView view{lay, ti, m};
    std::vector<double> out;
    for (std::int64_t x = win.lo; x <= win.hi; ++x) out.push_back(view.var_h_cv(x, ens.density.chi));
    return out;
  });
  f.cov_nn = per_site(&BlockView::cov_nn);
  f.cov_neta = per_site(&BlockView::cov_neta);
  f.cov_ne = per_site(&BlockView::cov_ne);
  return f;
}

std::vector<SiteResidual> stov_residuals(const HeightEnsemble& ens, std::size_t ti, const TwoPointField& s) {
  const HeightLayout& lay = ens.layout;
  const HeightWindow win = lay.windows.at(ti);
  const auto second_diff = batch_estimates(ens.sums, [&](const std::vector<double>& m) {
    const BlockView view{lay, ti, m};
    std::vector<double> out;
    for (std::int64_t x = win.lo + 1; x < win.hi; ++x) {
      out.push_back(view.var_h(x + 1) - 2.0 * view.var_h(x) + view.var_h(x - 1));
    }
    return out;
  });
  std::vector<SiteResidual> res;
  for (std::int64_t x = win.lo + 1; x < win.hi; ++x) {
    const Estimate& d = second_diff[static_cast<std::size_t>(x - win.lo - 1)];
    const auto it = s.values.find(x);
    const Estimate sx = it == s.values.end() ? Estimate{} : it->second;
    res.push_back({x, {8.0 * sx.value - d.value, combined_se(8.0 * sx.se, d.se)}});
  }
  return res;
}

Estimate abs_moment_residual(const HeightEnsemble& ens, std::size_t ti, const TwoPointField& s) {
  const HeightLayout& lay = ens.layout;
  const double t = lay.times.at(ti);
  const auto c = static_cast<std::int64_t>(std::floor((1.0 - 2.0 * ens.density.rho) * t));
  const double chi = ens.density.chi;
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [x, e] : s.values) {
    const double p = e.value / chi;
    const double d = static_cast<double>(std::abs(x - c));
    m1 += d * p;
    m2 += d * d * p;
  }
  const double n = static_cast<double>(s.replicas);
  const double se_s = chi * std::sqrt(std::max(0.0, m2 - m1 * m1) / std::max(1.0, n - 1.0));
  const Estimate v = batch_estimate(ens.sums, [&](const std::vector<double>& m) {
    return BlockView{lay, ti, m}.var_h(c);
  });
  return {chi * m1 - 0.25 * v.value, combined_se(se_s, 0.25 * v.se)};
}

HeightDiffusivity height_diffusivity(const HeightEnsemble& ens, std::size_t ti, double tolerance) {
  const HeightLayout& lay = ens.layout;
  const HeightWindow win = lay.windows.at(ti);
  const double t = lay.times.at(ti);
  if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "D(t) is undefined at t = 0");
  const double chi = ens.density.chi;
  const double center = (1.0 - 2.0 * ens.density.rho) * t;
  HeightDiffusivity out;
  const auto sum = [&](bool cv) {
    return batch_estimate(ens.sums, [&](const std::vector<double>& m) {
      const BlockView view{lay, ti, m};
      double s = 0.0;
      for (std::int64_t x = win.lo; x <= win.hi; ++x) {
        s += (cv ? view.var_h_cv(x, chi) : view.var_h(x)) - 4.0 * chi * std::abs(x - center);
      }
      return s / (4.0 * chi * t);
    });
  };
  out.d = sum(true);
  out.d_direct = sum(false);
  // Heuristic remainder: beyond the window the covariances are controlled by
  // the chance that a discrepancy crosses the gap, at most Poisson(t) steps.
  const std::int64_t gap = std::min(static_cast<std::int64_t>(std::floor(center)) - win.lo,
                                    win.hi - static_cast<std::int64_t>(std::ceil(center)));
  double tail = 0.0;
  for (std::int64_t d = gap + 1; d <= gap + 400; ++d) {
    tail += 2.0 * 8.0 * (static_cast<double>(d) + t) * boost::math::gamma_p(static_cast<double>(d), t);
  }
  out.tail_bound = tail / (4.0 * chi * t);
  if (out.tail_bound > tolerance) {
    fail(ErrorCode::WindowMassLoss, "height window tail bound " + std::to_string(out.tail_bound) +
                                        " exceeds tolerance " + std::to_string(tolerance));
  }
  return out;
}

std::vector<SiteResidual> lemma41_check(const HeightEnsemble& ens, std::size_t ti, std::int64_t max_abs_x) {
  const HeightLayout& lay = ens.layout;
  const HeightWindow win = lay.windows.at(ti);
  const std::int64_t lo = std::max(win.lo, -max_abs_x);
  const std::int64_t hi = std::min(win.hi, max_abs_x);
  const double chi = ens.density.chi;
  const auto est = batch_estimates(ens.sums, [&](const std::vector<double>& m) {
    const BlockView view{lay, ti, m};
    std::vector<double> out;
    for (std::int64_t x = lo; x <= hi; ++x) {
      const double sgn = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
      out.push_back(view.var_h(x) - 4.0 * chi * std::abs(static_cast<double>(x)) - 4.0 * view.cov_nn(x) +
                    4.0 * sgn * view.cov_ne(x));
    }
    return out;
  });
  std::vector<SiteResidual> res;
  for (std::int64_t x = lo; x <= hi; ++x) res.push_back({x, est[static_cast<std::size_t>(x - lo)]});
  return res;
}

namespace {

struct Line {
  double slope = 0.0, slope_se = 0.0;
};

// Weighted least squares of log|c| on x with weights (|c| / se)^2.
Line semilog_fit(const std::vector<double>& xs, const std::vector<Estimate>& cs) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = std::abs(cs[i].value);
    if (!(c > 0.0) || !(cs[i].se > 0.0)) continue;
    const double w = (c / cs[i].se) * (c / cs[i].se);
    const double y = std::log(c);
    sw += w;
    sx += w * xs[i];
    sy += w * y;
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) return {0.0, std::numeric_limits<double>::infinity()};
  return {(sw * sxy - sx * sy) / det, std::sqrt(sw / det)};
}

}  // namespace

DecayReport covariance_decay(const HeightEnsemble& ens, std::size_t ti, std::int64_t lo, std::int64_t hi) {
  const HeightField f = height_field(ens, ti);
  std::vector<double> xs;
  std::vector<Estimate> nn, neta;
  DecayReport r;
  for (std::int64_t x = f.window.lo; x <= f.window.hi; ++x) {
    const std::int64_t ax = std::abs(x);
    const std::size_t i = static_cast<std::size_t>(x - f.window.lo);
    if (ax >= lo && ax <= hi) {
      xs.push_back(static_cast<double>(ax));
      nn.push_back(f.cov_nn[i]);
      neta.push_back(f.cov_neta[i]);
    }
    if (ax == std::min(-f.window.lo, f.window.hi)) {
      r.max_far_abs_cov = std::max({r.max_far_abs_cov, std::abs(f.cov_nn[i].value), std::abs(f.cov_neta[i].value)});
    }
  }
  const Line a = semilog_fit(xs, nn);
  const Line b = semilog_fit(xs, neta);
  r.slope_nn = a.slope;
  r.slope_nn_se = a.slope_se;
  r.slope_neta = b.slope;
  r.slope_neta_se = b.slope_se;
  r.decaying = a.slope + 1.645 * a.slope_se < 0.0 && b.slope + 1.645 * b.slope_se < 0.0;
  return r;
}

std::vector<double> derivative_times(double t) {
  const double h = t / 4.0;
  return {t - h, t - h / 2.0, t, t + h / 2.0, t + h};
}

Estimate centered_mean(const TrackEnsemble& tracks, Density density, const JumpLaw& law, std::size_t ti) {
  const double m = drift_center(density, law, tracks.times.at(ti));
  std::vector<double> v;
  v.reserve(tracks.replicas());
  for (const auto& p : tracks.positions) v.push_back(static_cast<double>(p[ti]) - m);
  return to_estimate(mean_se(v));
}

DerivativeCheck tdt_derivative(const TrackEnsemble& unconditioned, const std::map<int, TrackEnsemble>& conditioned,
                               Density density, const JumpLaw& law, double t) {
  if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "derivative check needs t > 0");
  const double h = t / 4.0;
  const std::size_t i_m = unconditioned.time_index(t - h), i_mh = unconditioned.time_index(t - h / 2.0);
  const std::size_t i_ph = unconditioned.time_index(t + h / 2.0), i_p = unconditioned.time_index(t + h);
  const auto sq = [&](const std::vector<std::int64_t>& p, std::size_t i) {
    const double y = static_cast<double>(p[i]) - drift_center(density, law, unconditioned.times[i]);
    return y * y;
  };
  std::vector<double> coarse, fine, rich;
  for (const auto& p : unconditioned.positions) {
    const double a = (sq(p, i_p) - sq(p, i_m)) / (2.0 * h);
    const double b = (sq(p, i_ph) - sq(p, i_mh)) / h;
    coarse.push_back(a);
    fine.push_back(b);
    rich.push_back((4.0 * b - a) / 3.0);
  }
  DerivativeCheck out;
  out.lhs = to_estimate(mean_se(coarse));
  out.lhs_richardson = to_estimate(mean_se(rich));

  double rhs = law.second_moment();
  double var = 0.0;
  std::vector<int> needed;
  for (const auto& [z, p] : law.symmetrized_entries()) {
    if (z > 0 && p > 0.0) needed.push_back(z);
  }
  for (const int z : needed) {
    const auto it = conditioned.find(z);
    if (it == conditioned.end() || !has_conditioning(it->second, z, true)) {
      fail(ErrorCode::MissingConditionedEnsemble, "no ensemble conditioned on eta_" + std::to_string(z) + "(0) = 1");
    }
    const Estimate e = centered_mean(it->second, density, law, it->second.time_index(t));
    const double coef = 2.0 * density.rho * z * (law.probability(z) - law.probability(-z));
    rhs -= coef * e.value;
    var += coef * coef * e.se * e.se;
  }
  out.rhs = {rhs, std::sqrt(var)};
  return out;
}

SymmetryCheck lemma31_check(const TrackEnsemble& empty_y, const TrackEnsemble& occupied_y,
                            const TrackEnsemble& occupied_minus_y, Density density, const JumpLaw& law, double t) {
  const Estimate e0 = centered_mean(empty_y, density, law, empty_y.time_index(t));
  const Estimate e1 = centered_mean(occupied_y, density, law, occupied_y.time_index(t));
  const Estimate em = centered_mean(occupied_minus_y, density, law, occupied_minus_y.time_index(t));
  const double rho = density.rho;
  SymmetryCheck out;
  out.iden1 = {(1.0 - rho) * e0.value + rho * e1.value, combined_se((1.0 - rho) * e0.se, rho * e1.se)};
  out.iden2 = {e1.value - em.value, combined_se(e1.se, em.se)};
  return out;
}

MonotonicityVerdict monotonicity_report(const DiffusivityCurve& curve) {
  MonotonicityVerdict v;
  for (std::size_t i = 0; i + 1 < curve.times.size(); ++i) {
    const double a = curve.times[i] * curve.values[i].value;
    const double b = curve.times[i + 1] * curve.values[i + 1].value;
    const double se = combined_se(curve.times[i] * curve.values[i].se, curve.times[i + 1] * curve.values[i + 1].se);
    const double margin = b - a + 2.0 * se;
    v.margins.push_back(margin);
    if (margin < 0.0) v.monotone = false;
  }
  return v;
}

ThreeClassEnsemble three_class_ensemble(const SimConfig& config, const std::vector<double>& times,
                                        const EnsembleSpec& spec) {
  SimConfig c = config;
  if (c.horizon < (times.empty() ? 0.0 : times.back())) c.horizon = times.back();
  c = resolve(c);
  ThreeClassEnsemble out;
  out.times = times;
  out.samples = run_replicas<ThreeClassSample>(
      spec, [&](std::size_t, Philox4x32& rng) { return three_class_run(c, times, rng); });
  return out;
}

OrderCheck order_check(const ThreeClassEnsemble& ens, std::size_t ti) {
  std::vector<double> a, b, d;
  for (const auto& s : ens.samples) {
    a.push_back(static_cast<double>(s.third.positions.at(ti)));
    b.push_back(static_cast<double>(s.second.positions.at(ti)));
    d.push_back(b.back() - a.back());
  }
  return {to_estimate(mean_se(a)), to_estimate(mean_se(b)), to_estimate(mean_se(d))};
}

double conditional_order_probability(const JumpLaw& law, double adjacency_time) {
  const double p = law.probability(1), q = law.probability(-1);
  return (q * std::exp(-adjacency_time * (p + q)) + p) / (p + q);
}

std::vector<ConditionalBin> conditional_order_bins(const ThreeClassEnsemble& ens, const JumpLaw& law,
                                                   std::size_t ti, std::size_t bins) {
  struct Row {
    double t;
    double indicator;
    std::size_t replica;
  };
  std::vector<Row> rows;
  for (std::size_t r = 0; r < ens.samples.size(); ++r) {
    const auto& s = ens.samples[r];
    rows.push_back({s.adjacency_time.at(ti), s.third.positions.at(ti) < s.second.positions.at(ti) ? 1.0 : 0.0, r});
  }
  if (rows.empty()) fail(ErrorCode::EmptyEnsemble, "no three-class samples");
  std::sort(rows.begin(), rows.end(),
            [](const Row& x, const Row& y) { return x.t != y.t ? x.t < y.t : x.replica < y.replica; });
  bins = std::clamp<std::size_t>(bins, 1, rows.size());
  std::vector<ConditionalBin> out;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t first = b * rows.size() / bins, last = (b + 1) * rows.size() / bins;
    ConditionalBin bin;
    bin.t_lo = rows[first].t;
    bin.t_hi = rows[last - 1].t;
    bin.count = last - first;
    std::vector<double> diff;
    for (std::size_t i = first; i < last; ++i) {
      const double f = conditional_order_probability(law, rows[i].t);
      bin.empirical += rows[i].indicator;
      bin.predicted += f;
      diff.push_back(rows[i].indicator - f);
    }
    bin.empirical /= static_cast<double>(bin.count);
    bin.predicted /= static_cast<double>(bin.count);
    bin.se = mean_se(diff).se;
    out.push_back(bin);
  }
  return out;
}

}  // namespace aep
