#include "aep/model.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "aep/errors.hpp"

namespace aep {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    fail(ErrorCode::ConfigParse, "not a number: '" + std::string(token) + "'");
  }
  return value;
}

int parse_int(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    fail(ErrorCode::ConfigParse, "not an integer displacement: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

JumpLaw JumpLaw::make(const std::map<int, double>& entries) {
  JumpLaw law;
  double total = 0.0;
  for (const auto& [z, p] : entries) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      fail(ErrorCode::NegativeProbability,
           "p(" + std::to_string(z) + ") = " + std::to_string(p) + " is negative or not finite");
    }
    if (p == 0.0) continue;
    if (z == 0) fail(ErrorCode::ZeroDisplacement, "p(0) > 0 is not a jump");
    law.entries_.emplace(z, p);
    total += p;
  }
  if (law.entries_.empty()) fail(ErrorCode::EmptySupport, "jump law has no positive entries");
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total;
    fail(ErrorCode::NotNormalized, os.str());
  }

  int g = 0;
  double cumulative = 0.0;
  for (const auto& [z, p] : law.entries_) {
    law.drift_ += z * p;
    law.second_moment_ += static_cast<double>(z) * z * p;
    law.range_ = std::max(law.range_, std::abs(z));
    g = std::gcd(g, std::abs(z));
    cumulative += p;
    law.displacements_.push_back(z);
    law.cumulative_.push_back(cumulative / total);
  }
  law.kappa_ = g;
  law.cumulative_.back() = 1.0;

  for (const auto& [z, p] : law.entries_) {
    law.p_bar_[z] += 0.5 * p;
    law.p_bar_[-z] += 0.5 * p;
  }
  return law;
}

JumpLaw JumpLaw::tasep() { return make({{1, 1.0}}); }

double JumpLaw::probability(int z) const noexcept {
  const auto it = entries_.find(z);
  return it == entries_.end() ? 0.0 : it->second;
}

JumpLaw JumpLaw::symmetrized() const { return make(p_bar_); }

std::string JumpLaw::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [z, p] : entries_) {
    if (!first) os << ", ";
    os << z << ':' << p;
    first = false;
  }
  return os.str();
}

JumpLaw make_jump_law(const std::map<int, double>& entries) { return JumpLaw::make(entries); }

double parse_probability(std::string_view token) {
  token = trim(token);
  const auto slash = token.find('/');
  if (slash == std::string_view::npos) return parse_double(token);
  const double num = parse_double(token.substr(0, slash));
  const double den = parse_double(token.substr(slash + 1));
  if (den == 0.0) fail(ErrorCode::ConfigParse, "zero denominator in '" + std::string(token) + "'");
  return num / den;
}

JumpLaw parse_jump_law(std::string_view text) {
  std::map<int, double> entries;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of(",;", start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = trim(text.substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      fail(ErrorCode::ConfigParse, "jump law entry '" + std::string(item) + "' is not of the form z:p");
    }
    const int z = parse_int(item.substr(0, colon));
    if (entries.count(z) != 0) fail(ErrorCode::ConfigParse, "duplicate displacement " + std::to_string(z));
    entries[z] = parse_probability(item.substr(colon + 1));
  }
  return JumpLaw::make(entries);
}

Density Density::make(double rho) { return Density{rho, chi_of(rho)}; }

double chi_of(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    fail(ErrorCode::OutOfRange, "density " + std::to_string(rho) + " outside [0,1]");
  }
  return rho * (1.0 - rho);
}

SublatticeDecomposition sublattice_decompose(const JumpLaw& law) {
  const int k = law.kappa();
  if (k == 1) return {law, 1};
  std::map<int, double> reduced;
  for (const auto& [z, p] : law.entries()) reduced.emplace(z / k, p);
  return {JumpLaw::make(reduced), k};
}

JumpLaw dilate(const JumpLaw& law, int kappa) {
  if (kappa < 1) fail(ErrorCode::OutOfRange, "dilation factor must be positive");
  std::map<int, double> dilated;
  for (const auto& [z, p] : law.entries()) dilated.emplace(z * kappa, p);
  return JumpLaw::make(dilated);
}

RingState::RingState(std::int64_t ring_size)
    : size_(ring_size),
      sites_(static_cast<std::size_t>(ring_size), Site::Empty),
      index_(static_cast<std::size_t>(ring_size), -1) {
  if (ring_size < 2) fail(ErrorCode::InvalidConfig, "ring size must be at least 2");
  particles_.reserve(static_cast<std::size_t>(ring_size));
}

void RingState::place(std::int64_t offset, Site cls) {
  const std::int64_t s = wrap(offset);
  const Site old = sites_[s];
  if (old == Site::Class2) has_tagged_[0] = false;
  if (old == Site::Class3) has_tagged_[1] = false;

  if (old != Site::Empty && cls == Site::Empty) {
    const std::int32_t i = index_[s];
    const std::int64_t last_site = particles_.back();
    particles_[i] = last_site;
    index_[last_site] = i;
    particles_.pop_back();
    index_[s] = -1;
  } else if (old == Site::Empty && cls != Site::Empty) {
    index_[s] = static_cast<std::int32_t>(particles_.size());
    particles_.push_back(s);
  }
  sites_[s] = cls;

  if (cls == Site::Class2 || cls == Site::Class3) {
    const int slot = cls == Site::Class2 ? 0 : 1;
    if (has_tagged_[slot]) {
      fail(ErrorCode::InvalidConfig, "only one particle of each tagged class is supported");
    }
    has_tagged_[slot] = true;
    tagged_[slot] = offset;
  }
}

std::size_t RingState::count(Site cls) const noexcept {
  std::size_t n = 0;
  for (const Site s : sites_) n += (s == cls);
  return n;
}

bool RingState::has_tagged(Site cls) const noexcept {
  if (cls == Site::Class2) return has_tagged_[0];
  if (cls == Site::Class3) return has_tagged_[1];
  return false;
}

std::int64_t RingState::tagged_position(Site cls) const {
  if (!has_tagged(cls)) fail(ErrorCode::InvalidConfig, "no tagged particle of the requested class");
  return cls == Site::Class2 ? tagged_[0] : tagged_[1];
}

void RingState::enable_bond_counters() {
  forward_.assign(static_cast<std::size_t>(size_), 0);
  backward_.assign(static_cast<std::size_t>(size_), 0);
}

void RingState::count_crossing(std::int64_t from, int z) noexcept {
  if (z > 0) {
    std::int64_t b = from;
    for (int k = 0; k < z; ++k) {
      ++forward_[b];
      if (++b == size_) b = 0;
    }
  } else {
    std::int64_t b = from - 1;
    if (b < 0) b += size_;
    for (int k = 0; k < -z; ++k) {
      ++backward_[b];
      if (--b < 0) b += size_;
    }
  }
}

}  // namespace aep
