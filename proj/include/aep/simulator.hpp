#pragma once

// Event-driven simulation of the exclusion process on a ring.
//
// One global clock of rate n (the particle count, conserved by the
// dynamics) picks a particle uniformly and a displacement z ~ p, then the
// class-priority rule in RingState::attempt decides the outcome. This is
// the generator itself, so there is no time-step bias.

#include <cstdint>
#include <random>
#include <vector>

#include "aep/model.hpp"
#include "aep/rng.hpp"

namespace aep {

enum class RingMode {
  Line,      // ring stands in for Z: safe size enforced, seam checked
  Periodic,  // genuinely periodic system of the given size
};

struct Conditioning {
  std::int64_t site = 0;
  bool occupied = true;
};

struct SimConfig {
  JumpLaw law = JumpLaw::tasep();
  Density density = Density::make(0.5);
  std::int64_t ring_size = 0;  // 0 selects safe_ring_size
  double horizon = 0.0;
  std::uint64_t seed = 1;
  RingMode mode = RingMode::Line;
  std::vector<Conditioning> conditioning;
};

/// 2 * ceil(R (T + 10 sqrt(T + 1))) + 200.
std::int64_t safe_ring_size(const JumpLaw& law, double horizon);

/// Validates the config and fills ring_size when it is 0.
SimConfig resolve(SimConfig config);

/// Bernoulli(rho) first-class particles, then the conditioning constraints.
RingState init_stationary(const SimConfig& config, Philox4x32& rng);

/// Advances to `until` by drawing the Poisson number of clock rings in the
/// interval and executing them. Exact when only the state at `until` matters.
inline void advance(RingState& state, const JumpLaw& law, double until, Philox4x32& rng) {
  const double dt = until - state.time();
  const std::size_t n = state.particle_count();
  state.set_time(until);
  if (n == 0 || !(dt > 0.0)) return;
  std::poisson_distribution<std::uint64_t> clock(static_cast<double>(n) * dt);
  const std::uint64_t events = clock(rng);
  const auto count = static_cast<std::uint32_t>(n);
  if (law.displacements().size() == 1) {
    const int z = law.displacements().front();
    for (std::uint64_t e = 0; e < events; ++e) state.attempt(rng.bounded(count), z);
  } else {
    for (std::uint64_t e = 0; e < events; ++e) {
      const std::uint32_t i = rng.bounded(count);
      state.attempt(i, law.sample(rng.uniform()));
    }
  }
}

/// Advances to `until` with explicit exponential waiting times, calling
/// obs(state, time, from_site, to_site) after every realized move.
template <class Observer>
void advance_timed(RingState& state, const JumpLaw& law, double until, Philox4x32& rng, Observer& obs) {
  const std::size_t n = state.particle_count();
  if (n == 0) {
    state.set_time(std::max(state.time(), until));
    return;
  }
  const double rate = static_cast<double>(n);
  const auto count = static_cast<std::uint32_t>(n);
  const bool single = law.displacements().size() == 1;
  const int z0 = law.displacements().front();
  double t = state.time();
  for (;;) {
    t += rng.exponential(rate);
    if (t > until) break;
    const std::uint32_t i = rng.bounded(count);
    const int z = single ? z0 : law.sample(rng.uniform());
    const std::int64_t from = state.particle_site(i);
    if (state.attempt(i, z) != RingState::Outcome::Suppressed) {
      state.set_time(t);
      obs(state, t, from, state.wrap(from + z));
    }
  }
  state.set_time(until);
}

/// Positions of a tagged particle at the sample times, unwrapped.
struct TaggedTrack {
  Site cls = Site::Class2;
  std::vector<double> times;
  std::vector<std::int64_t> positions;
};

/// Single second-class particle started at 0 in a Bernoulli(rho)
/// background; positions recorded at `times` (ascending, nonnegative).
/// In Line mode the run fails with RingTooSmall when the particle comes
/// within 10 R of the antipode.
TaggedTrack second_class_run(const SimConfig& config, const std::vector<double>& times, Philox4x32& rng);

struct ThreeClassSample {
  TaggedTrack third;   // A, started at 0
  TaggedTrack second;  // B, started at 1
  std::vector<double> adjacency_time;  // time with |A - B| = 1 up to each sample
};

/// Third-class particle at 0, second-class at 1, Bernoulli(rho) elsewhere.
/// Nearest-neighbour laws only.
ThreeClassSample three_class_run(const SimConfig& config, const std::vector<double>& times, Philox4x32& rng);

/// Site interval [lo, hi] of offsets relative to an origin.
struct HeightWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::size_t size() const noexcept { return static_cast<std::size_t>(hi - lo + 1); }
};

/// Height function h_t(x) = 2 N_t(0) - M_t(x) read off a ring with bond
/// counters, for any origin on the ring. N_t(x) is the net first-class
/// current across bond (x, x+1).
class HeightObserver {
 public:
  /// `initial` must be the time-0 state (bond counters enabled).
  HeightObserver(const RingState& initial, HeightWindow window);

  const HeightWindow& window() const noexcept { return window_; }

  /// M_t(x) for x in the window, relative to `origin`.
  void profile(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& m) const;
  /// h_t(x) for x in the window.
  void heights(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& h) const;
  /// N_t(origin + x) for x in the window.
  void currents(const RingState& s, std::int64_t origin, std::vector<std::int64_t>& n) const;

  /// Number of window sites violating h(x+1) - h(x) = 1 - 2 eta_{x+1} or
  /// 2 (N(0) - N(x)) = M_t(x) - M_0(x). Exact integer arithmetic.
  std::size_t identity_violations(const RingState& s, std::int64_t origin) const;

 private:
  HeightWindow window_;
  std::vector<std::uint8_t> initial_;  // eta(0) per site
};

/// Per-site time integrals of the current w_y = sum_z z p(z) eta^_y eta^_{y+z},
/// with eta^ = (eta - rho) / sqrt(chi). Maintained lazily on every move.
class CurrentIntegralObserver {
 public:
  CurrentIntegralObserver(const RingState& state, const JumpLaw& law, Density density);

  void operator()(const RingState& s, double t, std::int64_t from, std::int64_t to);

  /// Brings every integral up to time t.
  void flush(const RingState& s, double t);
  const std::vector<double>& integrals() const noexcept { return integral_; }

  /// Instantaneous w_y.
  double current(const RingState& s, std::int64_t y) const;

 private:
  void touch(const RingState& s, std::int64_t y, double t);

  std::vector<int> z_;
  std::vector<double> zp_;
  double rho_;
  double inv_sqrt_chi_;
  std::vector<double> value_;
  std::vector<double> last_;
  std::vector<double> integral_;
};

/// Stationary run recording Q(t) = sum_y I_y(t) sum_{|x| <= L/4} I_{y+x}(t)
/// at each sample time, where I_y is the time integral of w_y.
std::vector<double> current_correlation_run(const SimConfig& config, const std::vector<double>& times,
                                            Philox4x32& rng);

}  // namespace aep
