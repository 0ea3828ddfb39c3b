#include "aep/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "aep/analysis.hpp"
#include "aep/cli/output.hpp"
#include "aep/errors.hpp"
#include "aep/estimators.hpp"
#include "aep/oracle.hpp"
#include "aep/resolvent.hpp"

namespace aep::cli {

namespace {

using json = nlohmann::ordered_json;

SimConfig sim_config(const Config& c) {
  SimConfig s;
  s.law = c.has("model.law") ? c.law("model.law") : JumpLaw::tasep();
  s.density = Density::make(c.number("model.rho", 0.5));
  s.ring_size = c.integer("model.ring_size", 0);
  const std::string mode = c.text("model.mode", "line");
  if (mode == "line") s.mode = RingMode::Line;
  else if (mode == "periodic") s.mode = RingMode::Periodic;
  else fail(ErrorCode::ConfigParse, "key 'model.mode': expected line or periodic, got '" + mode + "'");
  return s;
}

std::size_t positive(const Config& c, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = c.integer(key, fallback);
  if (v < 1) fail(ErrorCode::ConfigParse, "key '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t seed_of(const Config& c) {
  const std::int64_t v = c.integer("run.seed", 1);
  if (v < 0) fail(ErrorCode::ConfigParse, "key 'run.seed' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

EnsembleSpec ensemble_spec(const Config& c, const CommandOptions& o) {
  EnsembleSpec spec;
  spec.seed = seed_of(c);
  spec.replicas = positive(c, "run.replicas", 1000);
  spec.batches = std::min(positive(c, "run.batches", 100), spec.replicas);
  spec.threads = o.threads ? *o.threads : positive(c, "run.threads", 1);
  if (spec.threads < 1) fail(ErrorCode::ConfigParse, "thread count must be positive");
  return spec;
}

std::filesystem::path output_dir(const Config& c, const CommandOptions& o, const std::string& command) {
  if (!o.output.empty()) return o.output;
  if (c.has("run.output")) return c.text("run.output");
  return std::filesystem::path("results") / command;
}

std::vector<double> sample_times(const Config& c) {
  const auto t = parse_time_list(c.text("estimate.times"));
  if (t.empty()) fail(ErrorCode::ConfigParse, "key 'estimate.times' is empty");
  return t;
}

// per-batch means of Y = X - (1-2rho) b t and Y^2 at every sample time
std::string track_batches_jsonl(const TrackEnsemble& tracks, const EnsembleSpec& spec, const SimConfig& sim) {
  std::string out;
  const double shift = (1.0 - 2.0 * sim.density.rho) * sim.law.drift();
  for (std::size_t b = 0; b < spec.batches; ++b) {
    const auto [lo, hi] = batch_range(spec, b);
    std::vector<double> m1(tracks.times.size(), 0.0), m2(tracks.times.size(), 0.0);
    for (std::size_t r = lo; r < hi; ++r) {
      for (std::size_t i = 0; i < tracks.times.size(); ++i) {
        const double y = static_cast<double>(tracks.positions[r][i]) - shift * tracks.times[i];
        m1[i] += y;
        m2[i] += y * y;
      }
    }
    const double n = static_cast<double>(hi - lo);
    for (auto& v : m1) v /= n;
    for (auto& v : m2) v /= n;
    out += json{{"batch", b}, {"replicas", hi - lo}, {"mean_y", m1}, {"mean_y2", m2}}.dump() + "\n";
  }
  return out;
}

struct SimOutput {
  std::vector<CsvRow> rows;
  json results = json::object();
  std::string raw;
};

void curve_rows(const DiffusivityCurve& curve, SimOutput& out) {
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out.rows.push_back({curve.method, curve.times[i], std::nullopt, curve.values[i].value, curve.values[i].se,
                        curve.replicas});
  }
}

SimOutput simulate_variance(const SimConfig& sim, const std::vector<double>& times, const EnsembleSpec& spec) {
  SimOutput out;
  const TrackEnsemble tracks = second_class_ensemble(sim, times, spec);
  const DiffusivityCurve curve = diffusivity_variance(tracks, sim.density, sim.law);
  curve_rows(curve, out);
  const MonotonicityVerdict mono = monotonicity_report(curve);
  out.results["monotone_tD"] = mono.monotone;
  out.raw = track_batches_jsonl(tracks, spec, sim);
  return out;
}

SimOutput simulate_two_point(const SimConfig& sim, const std::vector<double>& times, const EnsembleSpec& spec) {
  SimOutput out;
  const TrackEnsemble tracks = second_class_ensemble(sim, times, spec);
  const std::int64_t reduce_to = sim.mode == RingMode::Periodic ? sim.ring_size : 0;
  json sums = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const TwoPointField f = two_point(tracks, sim.density, i, reduce_to);
    double mass = 0.0;
    for (const auto& [x, e] : f.values) {
      out.rows.push_back({"two_point", times[i], x, e.value, e.se, f.replicas});
      mass += e.value;
    }
    sums.push_back({{"t", times[i]}, {"sum_S", mass}});
  }
  out.results["sum_rule"] = sums;
  out.raw = track_batches_jsonl(tracks, spec, sim);
  return out;
}

SimOutput simulate_green_kubo(const SimConfig& sim, const std::vector<double>& times, const EnsembleSpec& spec) {
  SimOutput out;
  curve_rows(green_kubo_curve(sim, times, spec), out);
  return out;
}

SimOutput simulate_height(const Config& c, const SimConfig& sim, const std::vector<double>& times,
                          const EnsembleSpec& spec) {
  SimOutput out;
  const std::int64_t min_half = c.integer("estimate.min_half_width", 20);
  const std::int64_t stride = c.integer("estimate.origin_stride", 4);
  const HeightEnsemble ens = height_ensemble(sim, times, spec, min_half, stride);
  json tails = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const HeightDiffusivity hd = height_diffusivity(ens, i);
    out.rows.push_back({"height", times[i], std::nullopt, hd.d.value, hd.d.se, spec.replicas});
    out.rows.push_back({"height_direct", times[i], std::nullopt, hd.d_direct.value, hd.d_direct.se, spec.replicas});
    tails.push_back({{"t", times[i]}, {"tail_bound", hd.tail_bound}});
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    const HeightField f = height_field(ens, i);
    for (std::size_t k = 0; k < f.v.size(); ++k) {
      out.rows.push_back({"height_variance", times[i], f.window.lo + static_cast<std::int64_t>(k), f.v[k].value,
                          f.v[k].se, spec.replicas});
    }
  }
  out.results["identity_violations"] = ens.identity_violations;
  out.results["identity_checks"] = ens.identity_checks;
  out.results["tail_bounds"] = tails;
  return out;
}

SimOutput simulate_tdt(const SimConfig& sim, const std::vector<double>& check_times, const EnsembleSpec& spec) {
  SimOutput out;
  std::set<double> all;
  for (double t : check_times) {
    for (double s : derivative_times(t)) all.insert(s);
  }
  const std::vector<double> times(all.begin(), all.end());
  const TrackEnsemble plain = second_class_ensemble(sim, times, spec);
  std::map<int, TrackEnsemble> conditioned;
  for (const auto& [z, p] : sim.law.symmetrized_entries()) {
    if (z <= 0 || p <= 0.0) continue;
    SimConfig cz = sim;
    cz.conditioning = {{z, true}};
    EnsembleSpec sz = spec;
    sz.seed = spec.seed + 1000003ULL * static_cast<std::uint64_t>(z);
    conditioned.emplace(z, second_class_ensemble(cz, times, sz));
  }
  json checks = json::array();
  for (double t : check_times) {
    const DerivativeCheck d = tdt_derivative(plain, conditioned, sim.density, sim.law, t);
    out.rows.push_back({"tdt_lhs", t, std::nullopt, d.lhs.value, d.lhs.se, spec.replicas});
    out.rows.push_back({"tdt_lhs_richardson", t, std::nullopt, d.lhs_richardson.value, d.lhs_richardson.se,
                        spec.replicas});
    out.rows.push_back({"tdt_rhs", t, std::nullopt, d.rhs.value, d.rhs.se, spec.replicas});
    const double se = combined_se(d.lhs_richardson.se, d.rhs.se);
    checks.push_back({{"t", t}, {"z_score", se > 0.0 ? (d.lhs_richardson.value - d.rhs.value) / se : 0.0}});
  }
  out.results["paired"] = checks;
  out.raw = track_batches_jsonl(plain, spec, sim);
  return out;
}

SimOutput simulate_three_class(const Config& c, const SimConfig& sim, const std::vector<double>& times,
                               const EnsembleSpec& spec) {
  SimOutput out;
  const std::size_t bins = positive(c, "estimate.bins", 8);
  const ThreeClassEnsemble ens = three_class_ensemble(sim, times, spec);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const OrderCheck oc = order_check(ens, i);
    out.rows.push_back({"order_third", times[i], std::nullopt, oc.mean_a.value, oc.mean_a.se, spec.replicas});
    out.rows.push_back({"order_second", times[i], std::nullopt, oc.mean_b.value, oc.mean_b.se, spec.replicas});
    out.rows.push_back({"order_gap", times[i], std::nullopt, oc.difference.value, oc.difference.se, spec.replicas});
    const auto cb = conditional_order_bins(ens, sim.law, i, bins);
    for (std::size_t k = 0; k < cb.size(); ++k) {
      const auto x = static_cast<std::int64_t>(k);
      out.rows.push_back({"order_bin_empirical", times[i], x, cb[k].empirical, cb[k].se, cb[k].count});
      out.rows.push_back({"order_bin_predicted", times[i], x, cb[k].predicted, 0.0, cb[k].count});
    }
  }
  // per-batch fraction with A < B at every time
  for (std::size_t b = 0; b < spec.batches; ++b) {
    const auto [lo, hi] = batch_range(spec, b);
    std::vector<double> frac(times.size(), 0.0);
    for (std::size_t r = lo; r < hi; ++r) {
      for (std::size_t i = 0; i < times.size(); ++i) {
        frac[i] += ens.samples[r].third.positions[i] < ens.samples[r].second.positions[i] ? 1.0 : 0.0;
      }
    }
    for (auto& f : frac) f /= static_cast<double>(hi - lo);
    out.raw += json{{"batch", b}, {"replicas", hi - lo}, {"fraction_ordered", frac}}.dump() + "\n";
  }
  return out;
}

void finish_run(const std::filesystem::path& dir, const RunInfo& info, std::vector<std::pair<std::string, std::string>> files,
                bool timestamp) {
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    names.push_back(name);
  }
  write_manifest(dir, info, names, timestamp);
  std::cerr << "wrote " << names.size() + 1 << " files to " << dir.string() << "\n";
}

}  // namespace

int cmd_simulate(const Config& c, const CommandOptions& o) {
  SimConfig sim = sim_config(c);
  const EnsembleSpec spec = ensemble_spec(c, o);
  const std::vector<double> times = sample_times(c);
  const std::string method = c.text("estimate.method", "variance");
  sim.horizon = times.back();
  if (method == "tdt_derivative") sim.horizon = times.back() * 1.25;
  sim = resolve(sim);

  RunInfo info{"simulate", c.hash(), spec.seed};
  std::cerr << "aep simulate: method " << method << ", seed " << spec.seed << ", " << spec.replicas
            << " replicas, ring " << sim.ring_size << "\n";

  SimOutput out;
  if (method == "variance") out = simulate_variance(sim, times, spec);
  else if (method == "two_point") out = simulate_two_point(sim, times, spec);
  else if (method == "green_kubo") out = simulate_green_kubo(sim, times, spec);
  else if (method == "height") out = simulate_height(c, sim, times, spec);
  else if (method == "tdt_derivative") out = simulate_tdt(sim, times, spec);
  else if (method == "three_class") out = simulate_three_class(c, sim, times, spec);
  else fail(ErrorCode::ConfigParse, "key 'estimate.method': unknown method '" + method + "'");

  json summary = header_json(info);
  summary["method"] = method;
  summary["law"] = sim.law.to_string();
  summary["rho"] = sim.density.rho;
  summary["ring_size"] = sim.ring_size;
  summary["mode"] = sim.mode == RingMode::Line ? "line" : "periodic";
  summary["replicas"] = spec.replicas;
  summary["batches"] = spec.batches;
  summary["times"] = times;
  summary["results"] = out.results;

  std::vector<std::pair<std::string, std::string>> files{{"estimates.csv", estimates_csv(info, out.rows)},
                                                         {"summary.json", summary.dump(2) + "\n"}};
  if (!out.raw.empty()) files.emplace_back("raw.jsonl", out.raw);
  finish_run(output_dir(c, o, "simulate"), info, files, o.timestamp);
  return kOk;
}

namespace {

struct Golden {
  std::string name;
  std::string operation;
  json inputs;
  std::vector<double> values;
  double tolerance = 0.0;
  std::string provenance;
};

std::vector<Golden> golden_set(const Config& c) {
  const JumpLaw law = c.has("oracle.law") ? c.law("oracle.law") : JumpLaw::tasep();
  const double rho = c.number("oracle.rho", 0.5);
  std::vector<Golden> out;

  const int l2 = static_cast<int>(c.integer("oracle.two_point_ring", 10));
  const double t2 = c.number("oracle.two_point_time", 1.0);
  out.push_back({"exact_two_point", "exact_two_point",
                 json{{"L", l2}, {"rho", rho}, {"law", law.to_string()}, {"t", t2}},
                 exact_two_point(l2, rho, law, t2), 1e-10,
                 "uniformized semigroup on all 2^L configurations, truncation 1e-13"});

  const int ld = static_cast<int>(c.integer("oracle.diffusivity_ring", 12));
  const double td = c.number("oracle.diffusivity_time", 1.0);
  out.push_back({"exact_diffusivity", "exact_diffusivity",
                 json{{"L", ld}, {"rho", rho}, {"law", law.to_string()}, {"t", td}},
                 {exact_diffusivity(ld, rho, law, td)}, 1e-9,
                 "augmented generator of the environment seen from the second-class particle"});

  const int lh = static_cast<int>(c.integer("oracle.h1_ring", 12));
  const double lam = c.number("oracle.h1_lambda", 0.5);
  const int k = static_cast<int>(c.integer("oracle.h1_k", 2));
  LocalFunction v;
  v.terms = {{{0, 1}, 1.0}, {{0, k + 1}, -1.0}};
  out.push_back({"ring_h1_seminorm", "ring_h1_seminorm",
                 json{{"L", lh}, {"rho", rho}, {"law", law.to_string()}, {"flavor", "symmetric"}, {"lambda", lam},
                      {"phi", "eta^_{0,1} - eta^_{0," + std::to_string(k + 1) + "}"}},
                 {ring_h1_seminorm(v, lam, lh, rho, law, Flavor::Symmetric)}, 1e-9,
                 "direct solve of (lambda - S) u = sum of translates"});

  const double lp = c.number("oracle.prop22_lambda", 1.0);
  const Prop22Value p = prop22_value(static_cast<std::size_t>(k), lp);
  out.push_back({"prop22_value", "prop22_value", json{{"k", k}, {"lambda", lp}}, {p.closed}, 1e-12,
                 "closed form, checked against the tridiagonal solve"});
  return out;
}

json golden_json(const Golden& g, const RunInfo& info) {
  json j = header_json(info);
  j["operation"] = g.operation;
  j["inputs"] = g.inputs;
  if (g.values.size() == 1) j["value"] = g.values[0];
  else j["value"] = g.values;
  j["tolerance"] = g.tolerance;
  j["provenance"] = g.provenance;
  return j;
}

std::vector<double> stored_values(const json& j) {
  if (j.at("value").is_array()) return j.at("value").get<std::vector<double>>();
  return {j.at("value").get<double>()};
}

}  // namespace

int cmd_oracle(const Config& c, const CommandOptions& o) {
  const std::filesystem::path dir = output_dir(c, o, "golden");
  RunInfo info{"oracle", c.hash(), 0};
  const auto set = golden_set(c);
  std::vector<std::string> drift;
  std::vector<std::pair<std::string, std::string>> to_write;
  for (const auto& g : set) {
    const auto path = dir / (g.name + ".json");
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      json old;
      try {
        old = json::parse(in);
      } catch (const std::exception& e) {
        fail(ErrorCode::ConfigParse, path.string() + ": " + e.what());
      }
      const auto stored = stored_values(old);
      const double tol = old.value("tolerance", g.tolerance);
      bool moved = stored.size() != g.values.size();
      for (std::size_t i = 0; !moved && i < stored.size(); ++i) moved = std::abs(stored[i] - g.values[i]) > tol;
      if (moved) drift.push_back(g.name);
      if (!o.force) continue;
    }
    to_write.emplace_back(g.name + ".json", golden_json(g, info).dump(2) + "\n");
  }
  if (!drift.empty() && !o.force) {
    std::string names;
    for (const auto& n : drift) names += (names.empty() ? "" : ", ") + n;
    fail(ErrorCode::GoldenDrift, "stored values moved beyond tolerance: " + names + " (use --force to overwrite)");
  }
  for (const auto& [name, content] : to_write) write_file(dir / name, content);
  std::cerr << "aep oracle: " << to_write.size() << " written, " << set.size() - to_write.size()
            << " unchanged in " << dir.string() << "\n";
  return kOk;
}

int cmd_resolvent(const Config& c, const CommandOptions& o) {
  std::vector<std::size_t> ks;
  for (double k : c.numbers("resolvent.k", {1, 2, 3, 4, 5})) {
    if (!(k >= 1.0) || k != std::floor(k)) fail(ErrorCode::ConfigParse, "key 'resolvent.k' needs integers >= 1");
    ks.push_back(static_cast<std::size_t>(k));
  }
  const auto lambdas = c.numbers("resolvent.lambdas", {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8});
  const JumpLaw law = c.has("resolvent.law") ? c.law("resolvent.law") : JumpLaw::tasep();
  const auto scaling_lambdas = c.numbers("resolvent.scaling_lambdas", log_grid(1e-8, 1e-2, 13));
  for (double l : lambdas) {
    if (!(l > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda " + format_double(l) + " must be positive");
  }

  RunInfo info{"resolvent", c.hash(), 0};
  const auto rows = prop22_sweep(ks, lambdas);
  std::string sweep = "# aep " + std::string(kToolVersion) + " schema=1 command=resolvent config=" + info.config_hash +
                      " seed=0\nk,lambda,value_closed,value_numeric,gamma,c1,c2\n";
  std::map<std::size_t, std::pair<double, double>> range;
  double worst = 0.0;
  for (const auto& r : rows) {
    sweep += std::to_string(r.k) + "," + format_double(r.lambda) + "," + format_double(r.value_closed) + "," +
             format_double(r.value_numeric) + "," + format_double(r.gamma) + "," + format_double(r.c1) + "," +
             format_double(r.c2) + "\n";
    auto [it, fresh] = range.try_emplace(r.k, r.value_closed, r.value_closed);
    if (!fresh) {
      it->second.first = std::min(it->second.first, r.value_closed);
      it->second.second = std::max(it->second.second, r.value_closed);
    }
    worst = std::max(worst, std::abs(r.value_closed - r.value_numeric));
  }

  const ReducedKernel w = current_kernel(law);
  const ScalingFit fit = s_norm_scaling(w, scaling_lambdas);
  std::string scaling = "# aep " + std::string(kToolVersion) + " schema=1 command=resolvent config=" +
                        info.config_hash + " seed=0\nlambda,value\n";
  for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
    scaling += format_double(fit.lambdas[i]) + "," + format_double(fit.values[i]) + "\n";
  }

  json summary = header_json(info);
  json bounded = json::array();
  for (const auto& [k, mm] : range) {
    bounded.push_back({{"k", k}, {"min", mm.first}, {"max", mm.second}, {"max_over_min", mm.second / mm.first}});
  }
  summary["bounded"] = bounded;
  summary["max_disagreement"] = worst;
  summary["scaling"] = {{"law", law.to_string()}, {"slope", fit.slope}, {"intercept", fit.intercept}};
  finish_run(output_dir(c, o, "resolvent"), info,
             {{"sweep.csv", sweep}, {"scaling.csv", scaling}, {"summary.json", summary.dump(2) + "\n"}}, o.timestamp);
  return kOk;
}

namespace {

std::filesystem::path config_path(const Config& c, const std::string& key) {
  std::filesystem::path p = c.text(key);
  if (p.is_relative() && !c.directory().empty() && !std::filesystem::exists(p)) p = c.directory() / p;
  return p;
}

json fit_json(const FitResult& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"ci", {f.ci_lo, f.ci_hi}}, {"resamples", f.resamples}};
}

json transform_json(const TransformFit& t) {
  return json{{"label", t.label},
              {"exponent", fit_json(t.fit)},
              {"tail", {{"c", t.tail.c}, {"a", t.tail.a}}},
              {"lambdas", t.transform.lambdas},
              {"values", t.transform.values},
              {"errors", t.transform.errors},
              {"in_band", t.in_band}};
}

DiffusivityCurve subset(const DiffusivityCurve& curve, const std::vector<double>& times) {
  DiffusivityCurve out;
  out.method = curve.method;
  out.replicas = curve.replicas;
  for (double t : times) {
    bool found = false;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
      if (std::abs(curve.times[i] - t) <= 1e-9 * std::max(1.0, t)) {
        out.times.push_back(curve.times[i]);
        out.values.push_back(curve.values[i]);
        found = true;
        break;
      }
    }
    if (!found) fail(ErrorCode::GridMismatch, "fit time " + format_double(t) + " not in the curve");
  }
  return out;
}

}  // namespace

int cmd_report(const Config& c, const CommandOptions& o) {
  const std::string method = c.text("report.method", "variance");
  const DiffusivityCurve curve = read_curve(config_path(c, "report.curve"), method);
  const JumpLaw law = c.has("report.law") ? c.law("report.law") : JumpLaw::tasep();
  const std::vector<double> fit_times = c.has("report.fit_times") ? parse_time_list(c.text("report.fit_times"))
                                                                  : curve.times;
  const DiffusivityCurve coarse = subset(curve, fit_times);

  std::set<std::string> required;
  {
    std::stringstream ss(c.text("report.require", "exponent,ratio,monotone"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
      if (item.empty()) continue;
      if (item != "exponent" && item != "ratio" && item != "monotone" && item != "d_exponent") {
        fail(ErrorCode::ConfigParse, "key 'report.require': unknown section '" + item + "'");
      }
      required.insert(item);
    }
  }

  VerdictOptions vo;
  vo.exponent_lo = c.number("report.exponent_lo", vo.exponent_lo);
  vo.exponent_hi = c.number("report.exponent_hi", vo.exponent_hi);
  vo.ratio_bound = c.number("report.ratio_bound", vo.ratio_bound);
  vo.fit_lambda_min = c.number("report.fit_lambda_min", vo.fit_lambda_min);
  vo.fit_lambda_max = c.number("report.fit_lambda_max", vo.fit_lambda_max);
  vo.ratio_lambda_min = c.number("report.ratio_lambda_min", vo.ratio_lambda_min);
  vo.ratio_lambda_max = c.number("report.ratio_lambda_max", vo.ratio_lambda_max);
  vo.seed = seed_of(c);
  const double d_lo = c.number("report.d_exponent_lo", 0.25);
  const double d_hi = c.number("report.d_exponent_hi", 0.40);

  RunInfo info{"report", c.hash(), vo.seed};
  json verdict = header_json(info);
  verdict["law"] = law.to_string();
  verdict["method"] = method;

  std::vector<double> dv;
  for (const auto& e : coarse.values) dv.push_back(e.value);
  const FitResult dfit = exponent_fit(coarse.times, dv, {}, vo.seed);
  const double growth = dv.back() / dv.front();
  const bool d_ok = dfit.slope >= d_lo && dfit.slope <= d_hi;
  verdict["d_fit"] = {{"times", coarse.times}, {"values", dv}, {"fit", fit_json(dfit)},
                      {"growth_last_over_first", growth}, {"band", {d_lo, d_hi}}, {"in_band", d_ok}};

  const MonotonicityVerdict mono = monotonicity_report(coarse);
  verdict["monotonicity"] = {{"monotone", mono.monotone}, {"margins", mono.margins}};

  bool exponent_ok = false, ratio_ok = false;
  std::string ratio_csv;
  try {
    if (!c.has("report.baseline")) fail(ErrorCode::GridMismatch, "no TASEP baseline curve configured");
    const DiffusivityCurve base = read_curve(config_path(c, "report.baseline"), c.text("report.baseline_method", method));
    const WeakSenseReport r = weak_sense_verdict(curve, law, base, vo);
    exponent_ok = r.law.in_band;
    ratio_ok = r.ratio_in_band;
    verdict["weak_sense"] = {{"law", transform_json(r.law)},
                             {"tasep", transform_json(r.tasep)},
                             {"ratio", {{"lambdas", r.ratio_lambdas},
                                        {"values", r.ratios},
                                        {"min", r.ratio_min},
                                        {"max", r.ratio_max},
                                        {"bound", vo.ratio_bound},
                                        {"in_band", r.ratio_in_band}}}};
    ratio_csv = "# aep " + std::string(kToolVersion) + " schema=1 command=report config=" + info.config_hash +
                " seed=" + std::to_string(vo.seed) + "\nlambda,ratio\n";
    for (std::size_t i = 0; i < r.ratios.size(); ++i) {
      ratio_csv += format_double(r.ratio_lambdas[i]) + "," + format_double(r.ratios[i]) + "\n";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GridMismatch && e.code() != ErrorCode::DriftZero) throw;
    std::cerr << "weak-sense section: " << e.what() << "\n";
    verdict["weak_sense"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  }

  const std::map<std::string, bool> checks{
      {"exponent", exponent_ok}, {"ratio", ratio_ok}, {"monotone", mono.monotone}, {"d_exponent", d_ok}};
  bool pass = true;
  json jc = json::object();
  for (const auto& [name, ok] : checks) {
    jc[name] = {{"ok", ok}, {"required", required.count(name) != 0}};
    if (required.count(name) && !ok) pass = false;
  }
  verdict["checks"] = jc;
  verdict["pass"] = pass;

  std::vector<std::pair<std::string, std::string>> files{{"verdict.json", verdict.dump(2) + "\n"}};
  if (!ratio_csv.empty()) files.emplace_back("ratio.csv", ratio_csv);
  finish_run(output_dir(c, o, "report"), info, files, o.timestamp);
  std::cerr << "aep report: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kOk : kVerdictFailed;
}

}  // namespace aep::cli
