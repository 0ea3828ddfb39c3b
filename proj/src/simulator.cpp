#include "aep/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "aep/errors.hpp"

namespace aep {

namespace {

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
      fail(ErrorCode::InvalidConfig, "sample times must be nonnegative and ascending");
    }
  }
}

void check_seam(const SimConfig& config, std::int64_t position) {
  if (config.mode != RingMode::Line) return;
  const std::int64_t limit = config.ring_size / 2 - 10 * config.law.range();
  if (std::abs(position) > limit) {
    fail(ErrorCode::RingTooSmall, "tagged particle at " + std::to_string(position) +
                                      " is within the seam buffer of a ring of size " +
                                      std::to_string(config.ring_size));
  }
}

}  // namespace

std::int64_t safe_ring_size(const JumpLaw& law, double horizon) {
  const double reach = law.range() * (horizon + 10.0 * std::sqrt(horizon + 1.0));
  return 2 * static_cast<std::int64_t>(std::ceil(reach)) + 200;
}

SimConfig resolve(SimConfig config) {
  if (!(config.horizon >= 0.0) || !std::isfinite(config.horizon)) {
    fail(ErrorCode::InvalidConfig, "horizon must be a nonnegative number");
  }
  const std::int64_t safe = safe_ring_size(config.law, config.horizon);
  if (config.ring_size == 0) {
    if (config.mode == RingMode::Periodic) fail(ErrorCode::InvalidConfig, "periodic mode needs an explicit ring size");
    config.ring_size = safe;
  }
  if (config.ring_size < 2 || config.ring_size % 2 != 0) {
    fail(ErrorCode::InvalidConfig, "ring size must be even and at least 2");
  }
  if (config.ring_size > (std::int64_t{1} << 30)) fail(ErrorCode::InvalidConfig, "ring size too large");
  if (config.mode == RingMode::Line && config.ring_size < safe) {
    fail(ErrorCode::RingTooSmall, "ring size " + std::to_string(config.ring_size) + " below the safe size " +
                                      std::to_string(safe) + " for this horizon");
  }
  std::set<std::int64_t> seen;
  for (const auto& c : config.conditioning) {
    const std::int64_t s = ((c.site % config.ring_size) + config.ring_size) % config.ring_size;
    if (!seen.insert(s).second) {
      fail(ErrorCode::ConditioningConflict, "two constraints on site " + std::to_string(c.site));
    }
  }
  return config;
}

RingState init_stationary(const SimConfig& config, Philox4x32& rng) {
  RingState state(config.ring_size);
  const double rho = config.density.rho;
  for (std::int64_t x = 0; x < config.ring_size; ++x) {
    if (rng.uniform() < rho) state.place(x, Site::Class1);
  }
  std::set<std::int64_t> seen;
  for (const auto& c : config.conditioning) {
    if (!seen.insert(state.wrap(c.site)).second) {
      fail(ErrorCode::ConditioningConflict, "two constraints on site " + std::to_string(c.site));
    }
    state.place(c.site, c.occupied ? Site::Class1 : Site::Empty);
  }
  return state;
}

TaggedTrack second_class_run(const SimConfig& config, const std::vector<double>& times, Philox4x32& rng) {
  check_times(times);
  for (const auto& c : config.conditioning) {
    if (c.site % config.ring_size == 0) {
      fail(ErrorCode::ConditioningConflict, "site 0 holds the second-class particle");
    }
  }
  RingState state = init_stationary(config, rng);
  state.place(0, Site::Class2);

  TaggedTrack track;
  track.cls = Site::Class2;
  track.times = times;
  track.positions.reserve(times.size());
  for (double t : times) {
    advance(state, config.law, t, rng);
    const std::int64_t x = state.tagged_position(Site::Class2);
    check_seam(config, x);
    track.positions.push_back(x);
  }
  return track;
}

ThreeClassSample three_class_run(const SimConfig& config, const std::vector<double>& times, Philox4x32& rng) {
  if (!config.law.nearest_neighbor()) {
    fail(ErrorCode::NotNearestNeighbor, "three-class coupling needs p(z) = 0 for |z| != 1");
  }
  check_times(times);
  RingState state = init_stationary(config, rng);
  state.place(0, Site::Class3);
  state.place(1, Site::Class2);

  ThreeClassSample out;
  out.third.cls = Site::Class3;
  out.second.cls = Site::Class2;
  out.third.times = out.second.times = times;

  double adjacent_time = 0.0;
  double last = 0.0;
  bool adjacent = true;
  auto obs = [&](const RingState& s, double t, std::int64_t, std::int64_t) {
    if (adjacent) adjacent_time += t - last;
    last = t;
    adjacent = std::abs(s.tagged_position(Site::Class2) - s.tagged_position(Site::Class3)) == 1;
  };
  for (double t : times) {
    advance_timed(state, config.law, t, rng, obs);
    if (adjacent) adjacent_time += t - last;
    last = t;
    const std::int64_t a = state.tagged_position(Site::Class3);
    const std::int64_t b = state.tagged_position(Site::Class2);
    check_seam(config, a);
    check_seam(config, b);
    out.third.positions.push_back(a);
    out.second.positions.push_back(b);
    out.adjacency_time.push_back(adjacent_time);
  }
  return out;
}

HeightObserver::HeightObserver(const RingState& initial, HeightWindow window) : window_(window) {
  if (!initial.bond_counters_enabled()) fail(ErrorCode::InvalidConfig, "height observer needs bond counters");
  if (window.lo > 0 || window.hi < 0) fail(ErrorCode::InvalidConfig, "height window must contain 0");
  const std::int64_t reach = std::max(-window.lo, window.hi) + 1;
  if (reach >= initial.size() / 4) {
    fail(ErrorCode::WindowTooWide, "window reach " + std::to_string(reach) + " not below L/4 for L = " +
                                       std::to_string(initial.size()));
  }
  initial_.resize(static_cast<std::size_t>(initial.size()));
  for (std::int64_t x = 0; x < initial.size(); ++x) initial_[x] = initial.at(x) == Site::Class1;
}

void HeightObserver::profile(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& m) const {
  m.assign(window_.size(), 0);
  const auto at = [&](std::int64_t x) { return static_cast<std::size_t>(x - window_.lo); };
  std::int64_t acc = 0;
  for (std::int64_t x = 1; x <= window_.hi; ++x) {
    acc += 2 * static_cast<std::int64_t>(s.occupied_by_first_class(origin + x)) - 1;
    m[at(x)] = acc;
  }
  acc = 0;
  for (std::int64_t x = -1; x >= window_.lo; --x) {
    acc -= 2 * static_cast<std::int64_t>(s.occupied_by_first_class(origin + x + 1)) - 1;
    m[at(x)] = acc;
  }
}

void HeightObserver::heights(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& h) const {
  profile(s, origin, h);
  const std::int64_t n0 = s.net_current(origin);
  for (auto& v : h) v = 2 * n0 - v;
}

void HeightObserver::currents(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& n) const {
  n.resize(window_.size());
  for (std::int64_t x = window_.lo; x <= window_.hi; ++x) n[x - window_.lo] = s.net_current(origin + x);
}

std::size_t HeightObserver::identity_violations(const RingState& s, std::int64_t origin) const {
  std::vector<std::int64_t> h, m, n;
  heights(s, origin, h);
  profile(s, origin, m);
  currents(s, origin, n);
  // M_0 from the stored initial occupancy
  std::vector<std::int64_t> m0(window_.size(), 0);
  const std::int64_t L = s.size();
  const auto eta0 = [&](std::int64_t x) { return static_cast<std::int64_t>(initial_[((x % L) + L) % L]); };
  std::int64_t acc = 0;
  for (std::int64_t x = 1; x <= window_.hi; ++x) {
    acc += 2 * eta0(origin + x) - 1;
    m0[x - window_.lo] = acc;
  }
  acc = 0;
  for (std::int64_t x = -1; x >= window_.lo; --x) {
    acc -= 2 * eta0(origin + x + 1) - 1;
    m0[x - window_.lo] = acc;
  }

  std::size_t bad = 0;
  const std::int64_t n0 = n[-window_.lo];
  for (std::int64_t x = window_.lo; x <= window_.hi; ++x) {
    const std::size_t i = x - window_.lo;
    if (x < window_.hi) {
      const std::int64_t eta = s.occupied_by_first_class(origin + x + 1);
      if (h[i + 1] - h[i] != 1 - 2 * eta) ++bad;
    }
    if (2 * (n0 - n[i]) != m[i] - m0[i]) ++bad;
  }
  return bad;
}

CurrentIntegralObserver::CurrentIntegralObserver(const RingState& state, const JumpLaw& law, Density density)
    : rho_(density.rho),
      value_(static_cast<std::size_t>(state.size()), 0.0),
      last_(static_cast<std::size_t>(state.size()), state.time()),
      integral_(static_cast<std::size_t>(state.size()), 0.0) {
  if (!(density.chi > 0.0)) fail(ErrorCode::InvalidConfig, "current observer needs 0 < rho < 1");
  inv_sqrt_chi_ = 1.0 / std::sqrt(density.chi);
  for (const auto& [z, p] : law.entries()) {
    z_.push_back(z);
    zp_.push_back(z * p);
  }
  for (std::int64_t y = 0; y < state.size(); ++y) value_[y] = current(state, y);
}

double CurrentIntegralObserver::current(const RingState& s, std::int64_t y) const {
  const double a = ((s.at(y) == Site::Class1 ? 1.0 : 0.0) - rho_) * inv_sqrt_chi_;
  double w = 0.0;
  for (std::size_t k = 0; k < z_.size(); ++k) {
    const double b = ((s.at(y + z_[k]) == Site::Class1 ? 1.0 : 0.0) - rho_) * inv_sqrt_chi_;
    w += zp_[k] * a * b;
  }
  return w;
}

void CurrentIntegralObserver::touch(const RingState& s, std::int64_t y, double t) {
  const std::int64_t i = s.wrap(y);
  integral_[i] += value_[i] * (t - last_[i]);
  last_[i] = t;
  value_[i] = current(s, i);
}

void CurrentIntegralObserver::operator()(const RingState& s, double t, std::int64_t from, std::int64_t to) {
  // w_y depends on sites y and y + z, so a change at site a affects y = a and y = a - z
  for (const std::int64_t a : {from, to}) {
    touch(s, a, t);
    for (const int z : z_) touch(s, a - z, t);
  }
}

void CurrentIntegralObserver::flush(const RingState& s, double t) {
  for (std::int64_t y = 0; y < s.size(); ++y) {
    integral_[y] += value_[y] * (t - last_[y]);
    last_[y] = t;
  }
}

std::vector<double> current_correlation_run(const SimConfig& config, const std::vector<double>& times,
                                            Philox4x32& rng) {
  if (!config.conditioning.empty()) fail(ErrorCode::NotStationary, "current correlations need an unconditioned run");
  check_times(times);
  RingState state = init_stationary(config, rng);
  CurrentIntegralObserver obs(state, config.law, config.density);
  const std::int64_t L = state.size();
  const std::int64_t reach = L / 4;

  std::vector<double> out;
  std::vector<double> prefix(static_cast<std::size_t>(3 * L + 1));
  for (double t : times) {
    advance_timed(state, config.law, t, rng, obs);
    obs.flush(state, t);
    const auto& I = obs.integrals();
    prefix[0] = 0.0;
    for (std::int64_t k = 0; k < 3 * L; ++k) prefix[k + 1] = prefix[k] + I[k % L];
    double q = 0.0;
    for (std::int64_t y = 0; y < L; ++y) {
      // sites y - reach .. y + reach, shifted by L to keep indices nonnegative
      q += I[y] * (prefix[y + reach + L + 1] - prefix[y - reach + L]);
    }
    out.push_back(q);
  }
  return out;
}

}  // namespace aep
