#pragma once

// Core domain types: jump laws, densities and ring configurations.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aep {

/// Finite-range jump law p(.) on the integers, validated at construction.
///
/// Immutable; safe to share across threads. Laws with zero drift can be
/// built (they arise as symmetrizations) but are flagged, and operations
/// that need b != 0 reject them.
class JumpLaw {
 public:
  /// Tolerance on |sum p - 1|. Tighter breaks on textual inputs like 1/3.
  static constexpr double kNormalizationTolerance = 1e-12;

  /// Builds a law from (displacement, probability) entries. Zero entries
  /// are dropped from the support.
  static JumpLaw make(const std::map<int, double>& entries);

  /// The jump law p(1) = 1.
  static JumpLaw tasep();

  const std::map<int, double>& entries() const noexcept { return entries_; }
  double probability(int z) const noexcept;

  double drift() const noexcept { return drift_; }
  int range() const noexcept { return range_; }
  int kappa() const noexcept { return kappa_; }
  bool drift_zero() const noexcept { return drift_ == 0.0; }
  bool nearest_neighbor() const noexcept { return range_ == 1; }

  /// sum_z z^2 p(z), the short-time limit of the diffusivity.
  double second_moment() const noexcept { return second_moment_; }

  /// p_bar(z) = (p(z) + p(-z)) / 2.
  const std::map<int, double>& symmetrized_entries() const noexcept { return p_bar_; }
  JumpLaw symmetrized() const;

  /// Support as parallel arrays with cumulative probabilities, for sampling.
  const std::vector<int>& displacements() const noexcept { return displacements_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }

  /// Maps a uniform u in [0,1) to a displacement.
  int sample(double u) const noexcept {
    const std::size_t last = displacements_.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
      if (u < cumulative_[i]) return displacements_[i];
    }
    return displacements_[last];
  }

  std::string to_string() const;

  friend bool operator==(const JumpLaw& a, const JumpLaw& b) { return a.entries_ == b.entries_; }

 private:
  JumpLaw() = default;

  std::map<int, double> entries_;
  std::map<int, double> p_bar_;
  std::vector<int> displacements_;
  std::vector<double> cumulative_;
  double drift_ = 0.0;
  double second_moment_ = 0.0;
  int range_ = 0;
  int kappa_ = 0;
};

JumpLaw make_jump_law(const std::map<int, double>& entries);

/// Parses "z:p, z:p, ..." where p is a decimal or a ratio "a/b".
JumpLaw parse_jump_law(std::string_view text);

/// Parses one probability token: a decimal string or "a/b".
double parse_probability(std::string_view token);

struct Density {
  double rho = 0.0;
  double chi = 0.0;

  static Density make(double rho);
};

double chi_of(double rho);

struct SublatticeDecomposition {
  JumpLaw law;  // p~(y) = p(kappa * y)
  int kappa = 1;
};

SublatticeDecomposition sublattice_decompose(const JumpLaw& law);

/// Inverse of sublattice_decompose: p(kappa * y) = p~(y).
JumpLaw dilate(const JumpLaw& law, int kappa);

enum class Site : std::uint8_t { Empty = 0, Class1 = 1, Class2 = 2, Class3 = 3 };

/// Periodic lattice occupancy with class labels, per-bond crossing counters
/// and unwrapped positions of the (at most one each) second- and third-class
/// particles.
///
/// Offsets are coordinates relative to the origin site 0; they are reduced
/// mod L to site indices. Bond b joins sites b and b+1.
class RingState {
 public:
  enum class Outcome : std::uint8_t { Suppressed, Moved, Swapped };

  explicit RingState(std::int64_t ring_size);

  std::int64_t size() const noexcept { return size_; }
  std::int64_t wrap(std::int64_t offset) const noexcept {
    std::int64_t s = offset % size_;
    return s < 0 ? s + size_ : s;
  }

  Site at(std::int64_t offset) const noexcept { return sites_[wrap(offset)]; }
  bool occupied_by_first_class(std::int64_t offset) const noexcept {
    return sites_[wrap(offset)] == Site::Class1;
  }

  /// Overwrites the class at an offset (setup only; not a dynamical move).
  void place(std::int64_t offset, Site cls);

  std::size_t particle_count() const noexcept { return particles_.size(); }
  std::size_t count(Site cls) const noexcept;
  std::int64_t particle_site(std::size_t i) const noexcept { return particles_[i]; }

  /// Unwrapped position of the tagged Class2 / Class3 particle.
  std::int64_t tagged_position(Site cls) const;
  bool has_tagged(Site cls) const noexcept;

  void enable_bond_counters();
  bool bond_counters_enabled() const noexcept { return !forward_.empty(); }
  std::uint64_t forward_crossings(std::int64_t bond_offset) const { return forward_[wrap(bond_offset)]; }
  std::uint64_t backward_crossings(std::int64_t bond_offset) const { return backward_[wrap(bond_offset)]; }
  /// Net first-class crossings of bond (x, x+1), left to right.
  std::int64_t net_current(std::int64_t bond_offset) const {
    const auto b = wrap(bond_offset);
    return static_cast<std::int64_t>(forward_[b]) - static_cast<std::int64_t>(backward_[b]);
  }

  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  /// Attempts a jump of particle i by z under the class-priority rule: an
  /// empty target is entered; a lower-priority (higher class index) target
  /// is exchanged with; otherwise the jump is suppressed.
  Outcome attempt(std::size_t i, int z) noexcept {
    const std::int64_t x = particles_[i];
    std::int64_t y = x + z;
    if (y >= size_) y -= size_;
    else if (y < 0) y += size_;
    const Site mover = sites_[x];
    const Site target = sites_[y];
    if (target == Site::Empty) {
      sites_[y] = mover;
      sites_[x] = Site::Empty;
      particles_[i] = y;
      index_[y] = static_cast<std::int32_t>(i);
      index_[x] = -1;
      track(mover, z);
      if (mover == Site::Class1 && !forward_.empty()) count_crossing(x, z);
      return Outcome::Moved;
    }
    if (static_cast<std::uint8_t>(target) > static_cast<std::uint8_t>(mover)) {
      const std::int32_t j = index_[y];
      sites_[y] = mover;
      sites_[x] = target;
      particles_[i] = y;
      particles_[j] = x;
      index_[y] = static_cast<std::int32_t>(i);
      index_[x] = j;
      track(mover, z);
      track(target, -z);
      if (mover == Site::Class1 && !forward_.empty()) count_crossing(x, z);
      return Outcome::Swapped;
    }
    return Outcome::Suppressed;
  }

 private:
  void track(Site cls, int z) noexcept {
    if (cls == Site::Class2) tagged_[0] += z;
    else if (cls == Site::Class3) tagged_[1] += z;
  }

  void count_crossing(std::int64_t from, int z) noexcept;

  std::int64_t size_;
  std::vector<Site> sites_;
  std::vector<std::int32_t> index_;      // site -> particle, -1 if empty
  std::vector<std::int64_t> particles_;  // particle -> site
  std::vector<std::uint64_t> forward_;
  std::vector<std::uint64_t> backward_;
  std::int64_t tagged_[2] = {0, 0};
  bool has_tagged_[2] = {false, false};
  double time_ = 0.0;
};

}  // namespace aep
