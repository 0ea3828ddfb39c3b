#pragma once

// Statistical estimators built on replica ensembles: the two-point
// function, three routes to the diffusivity, height-function variances and
// the checkable identities between them.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aep/ensemble.hpp"
#include "aep/model.hpp"
#include "aep/simulator.hpp"

namespace aep {

/// Tagged positions of many replicas on a common time grid.
struct TrackEnsemble {
  std::vector<double> times;
  std::vector<std::vector<std::int64_t>> positions;  // [replica][time index]
  std::vector<Conditioning> conditioning;
  std::uint64_t seed = 0;

  std::size_t replicas() const noexcept { return positions.size(); }
  std::size_t time_index(double t) const;
};

/// Runs second_class_run for every replica of the spec.
TrackEnsemble second_class_ensemble(const SimConfig& config, const std::vector<double>& times,
                                    const EnsembleSpec& spec);

struct TwoPointField {
  double t = 0.0;
  std::map<std::int64_t, Estimate> values;  // x -> S(x, t)
  std::size_t replicas = 0;
};

/// S(x,t) = chi * P(X(t) = x) with binomial standard errors. With
/// ring_size > 0 positions are reduced to sites 0..L-1 first.
TwoPointField two_point(const TrackEnsemble& tracks, Density density, std::size_t time_index,
                        std::int64_t ring_size = 0);

struct DiffusivityCurve {
  std::string method;
  std::vector<double> times;
  std::vector<Estimate> values;
  std::size_t replicas = 0;
};

/// D(t) = E[(X(t) - (1-2rho) b t)^2] / t with a fourth-moment (delta
/// method) standard error. Unconditioned ensembles only.
DiffusivityCurve diffusivity_variance(const TrackEnsemble& tracks, Density density, const JumpLaw& law);

/// Green-Kubo estimate from per-replica Q(t) values of
/// current_correlation_run: D = sum z^2 p + chi E[Q] / (t L).
Estimate green_kubo_D(const std::vector<double>& q_values, Density density, const JumpLaw& law, double t,
                      std::int64_t ring_size, std::size_t batches);

DiffusivityCurve green_kubo_curve(const SimConfig& config, const std::vector<double>& times,
                                  const EnsembleSpec& spec);

/// Layout of the per-origin height statistics accumulated by height_ensemble.
struct HeightLayout {
  std::vector<double> times;
  std::vector<HeightWindow> windows;  // per time
  std::vector<std::size_t> offsets;   // start of each time block
  std::size_t width = 0;

  // quantity slots within a time block; each has one entry per window site
  enum Slot : std::size_t { H, H2, N0H, N, N0N, Eta, N0Eta, E, N0E, kSlots };
  // scalars after the per-site slots
  enum Scalar : std::size_t { N0, N02, kScalars };

  std::size_t index(std::size_t ti, Slot s, std::int64_t x) const {
    return offsets[ti] + s * windows[ti].size() + static_cast<std::size_t>(x - windows[ti].lo);
  }
  std::size_t scalar(std::size_t ti, Scalar s) const { return offsets[ti] + kSlots * windows[ti].size() + s; }
};

struct HeightEnsemble {
  HeightLayout layout;
  BatchedSums sums;  // per-replica averages over origins
  Density density;
  std::size_t identity_violations = 0;
  std::size_t identity_checks = 0;
};

/// Half-width of the height window at time t.
std::int64_t height_half_width(double t, std::int64_t minimum);

/// Stationary runs with bond counters; at each time and for origins
/// 0, stride, 2 stride, ... accumulates h, N, eta and window sums.
/// Pathwise identities are checked at every sample of every replica.
HeightEnsemble height_ensemble(const SimConfig& config, const std::vector<double>& times, const EnsembleSpec& spec,
                               std::int64_t min_half_width, std::int64_t origin_stride);

struct HeightField {
  double t = 0.0;
  HeightWindow window;
  std::vector<Estimate> v;        // Var h_t(x), sample variance
  std::vector<Estimate> v_cv;     // 4 chi |x| - 4 Var N_t(0) + 4 Cov(N_t(0), h_t(x))
  std::vector<Estimate> cov_nn;   // Cov(N_t(0), N_t(x))
  std::vector<Estimate> cov_neta; // Cov(N_t(0), eta_x(t))
  std::vector<Estimate> cov_ne;   // Cov(N_t(0), sum_{y=-|x|+1}^{|x|} eta_y(t))
};

HeightField height_field(const HeightEnsemble& ens, std::size_t time_index);

struct SiteResidual {
  std::int64_t x = 0;
  Estimate residual;
};

/// 8 S(x,t) - (v(x+1) - 2 v(x) + v(x-1)) for interior window sites.
std::vector<SiteResidual> stov_residuals(const HeightEnsemble& ens, std::size_t time_index,
                                         const TwoPointField& s);

/// sum_x |x - c| S(x,t) - Var h_t(c) / 4 with c = floor((1-2rho)t). Summing
/// 8S = second difference of v by parts gives the factor 1/4; a factor 2
/// is off by 8 against that identity.
Estimate abs_moment_residual(const HeightEnsemble& ens, std::size_t time_index, const TwoPointField& s);

struct HeightDiffusivity {
  Estimate d;         // from the control-variate v
  Estimate d_direct;  // from the sample variance of h
  double tail_bound = 0.0;
};

/// (4 chi t)^-1 sum_x [v(x,t) - 4 chi |x - (1-2rho) t|] over the window.
HeightDiffusivity height_diffusivity(const HeightEnsemble& ens, std::size_t time_index, double tolerance = 1e-3);

/// v(x,t) - 4chi|x| - 4Cov(N0,Nx) + 4sgn(x)Cov(N0, sum eta) for |x| <= max_abs_x.
std::vector<SiteResidual> lemma41_check(const HeightEnsemble& ens, std::size_t time_index, std::int64_t max_abs_x);

struct DecayReport {
  double slope_nn = 0.0, slope_nn_se = 0.0;
  double slope_neta = 0.0, slope_neta_se = 0.0;
  bool decaying = false;
  double max_far_abs_cov = 0.0;  // largest |Cov| at the far end of the window
};

/// Weighted semi-log fit of |Cov(N0, N_x)| and |Cov(N0, eta_x)| over
/// lo <= |x| <= hi; decaying when both slopes are negative at 95%.
DecayReport covariance_decay(const HeightEnsemble& ens, std::size_t time_index, std::int64_t lo, std::int64_t hi);

struct DerivativeCheck {
  Estimate lhs;             // centered difference of tD with step t/4
  Estimate lhs_richardson;  // extrapolated from steps t/4 and t/8
  Estimate rhs;
};

/// Times an unconditioned ensemble must contain for tdt_derivative at t.
std::vector<double> derivative_times(double t);

/// Conditioned-start identity for d/dt (t D(t)). `conditioned` maps each z > 0
/// with p(z) + p(-z) > 0 to an ensemble conditioned on eta_z(0) = 1.
DerivativeCheck tdt_derivative(const TrackEnsemble& unconditioned, const std::map<int, TrackEnsemble>& conditioned,
                               Density density, const JumpLaw& law, double t);

/// Mean of X(t) - (1-2rho) b t with standard error.
Estimate centered_mean(const TrackEnsemble& tracks, Density density, const JumpLaw& law, std::size_t time_index);

struct SymmetryCheck {
  Estimate iden1;  // (1-rho) E[X~ | eta_y = 0] + rho E[X~ | eta_y = 1]
  Estimate iden2;  // E[X~ | eta_y = 1] - E[X~ | eta_-y = 1]
};

SymmetryCheck lemma31_check(const TrackEnsemble& empty_y, const TrackEnsemble& occupied_y,
                            const TrackEnsemble& occupied_minus_y, Density density, const JumpLaw& law, double t);

struct MonotonicityVerdict {
  bool monotone = true;
  std::vector<double> margins;  // t_{i+1}D_{i+1} - t_i D_i + 2 combined SE
};

MonotonicityVerdict monotonicity_report(const DiffusivityCurve& curve);

struct ThreeClassEnsemble {
  std::vector<double> times;
  std::vector<ThreeClassSample> samples;
};

ThreeClassEnsemble three_class_ensemble(const SimConfig& config, const std::vector<double>& times,
                                        const EnsembleSpec& spec);

struct OrderCheck {
  Estimate mean_a, mean_b;
  Estimate difference;  // E[B] - E[A]
};

OrderCheck order_check(const ThreeClassEnsemble& ens, std::size_t time_index);

struct ConditionalBin {
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t count = 0;
  double empirical = 0.0;  // fraction with A < B
  double predicted = 0.0;  // mean of the conditional formula over the bin
  double se = 0.0;
};

/// P(A < B | T) = (p(-1) exp(-T (p(1) + p(-1))) + p(1)) / (p(1) + p(-1)).
double conditional_order_probability(const JumpLaw& law, double adjacency_time);

/// Bins samples by adjacency time into `bins` equal-count groups.
std::vector<ConditionalBin> conditional_order_bins(const ThreeClassEnsemble& ens, const JumpLaw& law,
                                                   std::size_t time_index, std::size_t bins);

}  // namespace aep
