#include <doctest.h>

#include "aep/errors.hpp"
#include "aep/model.hpp"

using namespace aep;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("tasep law") {
  const JumpLaw t = JumpLaw::tasep();
  CHECK(t.drift() == 1.0);
  CHECK(t.range() == 1);
  CHECK(t.kappa() == 1);
  CHECK(t.nearest_neighbor());
  CHECK(t.second_moment() == 1.0);
  CHECK(t.symmetrized_entries().at(1) == 0.5);
  CHECK(t.symmetrized_entries().at(-1) == 0.5);
}

TEST_CASE("parsed ratios") {
  const JumpLaw law = parse_jump_law("1:2/3, -1:1/3");
  CHECK(law.drift() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(law.second_moment() == doctest::Approx(1.0));
  CHECK(parse_probability("3/4") == 0.75);
  CHECK(parse_probability(" 0.25 ") == 0.25);
}

TEST_CASE("law validation") {
  CHECK(code_of([] { JumpLaw::make({{1, 0.5}, {2, 0.6}}); }) == ErrorCode::NotNormalized);
  CHECK(code_of([] { JumpLaw::make({{1, 1.5}, {2, -0.5}}); }) == ErrorCode::NegativeProbability);
  CHECK(code_of([] { JumpLaw::make({{0, 1.0}}); }) == ErrorCode::ZeroDisplacement);
  CHECK(code_of([] { JumpLaw::make({{1, 0.0}}); }) == ErrorCode::EmptySupport);
  CHECK(code_of([] { parse_jump_law("1:0.5, 1:0.5"); }) == ErrorCode::ConfigParse);
  CHECK(code_of([] { parse_jump_law("1=1"); }) == ErrorCode::ConfigParse);
  CHECK(code_of([] { parse_probability("1/0"); }) == ErrorCode::ConfigParse);
  CHECK(code_of([] { Density::make(1.5); }) == ErrorCode::OutOfRange);
}

TEST_CASE("zero-drift laws are built but flagged") {
  const JumpLaw sym = JumpLaw::make({{1, 0.5}, {-1, 0.5}});
  CHECK(sym.drift_zero());
  CHECK(JumpLaw::tasep().symmetrized() == sym);
}

TEST_CASE("round trip through text") {
  for (const char* text : {"1:1", "1:2/3, -1:1/3", "2:0.5, -4:0.25, 6:0.25", "1:0.7, -1:0.3", "3:0.125, -2:0.875"}) {
    const JumpLaw law = parse_jump_law(text);
    CHECK(parse_jump_law(law.to_string()) == law);
  }
}

TEST_CASE("sublattice decomposition") {
  const JumpLaw law = parse_jump_law("2:0.5, -4:0.25, 6:0.25");
  CHECK(law.kappa() == 2);
  CHECK(law.range() == 6);
  const auto d = sublattice_decompose(law);
  CHECK(d.kappa == 2);
  CHECK(d.law.kappa() == 1);
  CHECK(d.law.probability(-2) == 0.25);
  CHECK(dilate(d.law, d.kappa) == law);
  const JumpLaw t = JumpLaw::tasep();
  CHECK(sublattice_decompose(t).law == t);
}

TEST_CASE("sampling follows the cumulative table") {
  const JumpLaw law = parse_jump_law("-1:0.25, 1:0.5, 2:0.25");
  CHECK(law.sample(0.0) == -1);
  CHECK(law.sample(0.2499) == -1);
  CHECK(law.sample(0.25) == 1);
  CHECK(law.sample(0.7499) == 1);
  CHECK(law.sample(0.75) == 2);
  CHECK(law.sample(0.9999999) == 2);
}

TEST_CASE("density") {
  CHECK(Density::make(0.5).chi == 0.25);
  CHECK(chi_of(0.2) == doctest::Approx(0.16));
}

TEST_CASE("ring moves respect class priority") {
  RingState s(8);
  s.enable_bond_counters();
  s.place(0, Site::Class1);
  s.place(1, Site::Class2);
  s.place(3, Site::Class1);
  s.place(4, Site::Class3);
  CHECK(s.particle_count() == 4);
  CHECK(s.count(Site::Class1) == 2);

  auto index_at = [&](std::int64_t site) {
    for (std::size_t i = 0; i < s.particle_count(); ++i) {
      if (s.particle_site(i) == site) return i;
    }
    FAIL("no particle at site");
    return std::size_t{0};
  };
  // first class onto second class: swap, second class displaced backwards
  CHECK(s.attempt(index_at(0), 1) == RingState::Outcome::Swapped);
  CHECK(s.at(1) == Site::Class1);
  CHECK(s.at(0) == Site::Class2);
  CHECK(s.tagged_position(Site::Class2) == 0);
  CHECK(s.net_current(0) == 1);
  // second class onto first class: suppressed
  CHECK(s.attempt(index_at(0), 1) == RingState::Outcome::Suppressed);
  // first class onto third class: swap
  CHECK(s.attempt(index_at(3), 1) == RingState::Outcome::Swapped);
  CHECK(s.at(4) == Site::Class1);
  CHECK(s.at(3) == Site::Class3);
  CHECK(s.tagged_position(Site::Class3) == 3);
  // wrap-around move crosses bond 7
  CHECK(s.attempt(index_at(0), -1) == RingState::Outcome::Moved);
  CHECK(s.at(7) == Site::Class2);
  CHECK(s.tagged_position(Site::Class2) == -1);
  CHECK(s.net_current(7) == 0);
  CHECK(s.wrap(-9) == 7);
}
