#pragma once

// Exact computations on small rings: generator assembly over all 2^L
// configurations, the uniformized semigroup, resolvent solves, and the
// exact second-class displacement moments.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "aep/model.hpp"

namespace aep {

enum class Flavor {
  Full,       // L, jump law p
  Symmetric,  // S, jump law p_bar
};

/// Rate matrix on configurations of a ring of L sites; bit x of a state
/// index is eta_x. Rows sum to zero.
struct GeneratorMatrix {
  int ring_size = 0;
  Flavor flavor = Flavor::Full;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;
  double max_exit_rate = 0.0;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(q.rows()); }
};

inline constexpr int kMaxOracleRing = 14;
inline constexpr int kMaxExactRing = 12;

GeneratorMatrix build_generator(int ring_size, const JumpLaw& law, Flavor flavor);

/// Product Bernoulli(rho) weights over all 2^L configurations.
Eigen::VectorXd product_measure(int ring_size, double rho);

/// max |(pi^T G)_j|.
double stationarity_residual(const GeneratorMatrix& g, double rho);

/// Poisson truncation point N with P(Poisson(mean) > N) below tol.
std::size_t poisson_truncation(double mean, double tol);

/// e^{tG} v by uniformization; truncation error below tol * max|v|.
Eigen::VectorXd semigroup_apply(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v, double tol = 1e-13);

/// v^T e^{tG}, returned as a column vector.
Eigen::VectorXd semigroup_apply_left(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v,
                                     double tol = 1e-13);

/// S(x, t) for sites x = 0..L-1 of the ring.
std::vector<double> exact_two_point(int ring_size, double rho, const JumpLaw& law, double t);

/// Signed ring coordinate of site s: s for s < L/2, s - L for s > L/2.
/// The antipode L/2 is split evenly between +L/2 and -L/2.
struct WrappedMoments {
  double mass = 0.0;
  double first = 0.0;
  double second_about = 0.0;  // sum (x_w - center)^2 S
};

WrappedMoments wrapped_moments(const std::vector<double>& s, double center);

/// Exact moments of the unwrapped second-class displacement on the ring.
struct DisplacementMoments {
  double mean = 0.0;
  double second = 0.0;      // E[X^2]
  double centered = 0.0;    // E[(X - (1-2rho) b t)^2]
  double diffusivity = 0.0; // centered / t
};

DisplacementMoments exact_displacement_moments(int ring_size, double rho, const JumpLaw& law, double t);

/// D(t) from the unwrapped displacement of the second-class particle.
double exact_diffusivity(int ring_size, double rho, const JumpLaw& law, double t);

/// D(t) from the wrapped-coordinate moments of S; needs the light cone
/// R (t + 6 sqrt t) < L/2.
double exact_diffusivity_wrapped(int ring_size, double rho, const JumpLaw& law, double t);

/// Local function as coefficients over products eta^_A, eta^ = (eta-rho)/sqrt(chi).
struct LocalFunction {
  struct Term {
    std::vector<int> sites;
    double coefficient = 0.0;
  };
  std::vector<Term> terms;

  int diameter() const;
};

/// (1/L) <Phi, (lambda - G)^{-1} Phi>_pi with Phi = sum_x tau_x phi.
double ring_h1_seminorm(const LocalFunction& phi, double lambda, int ring_size, double rho, const JumpLaw& law,
                        Flavor flavor);

/// Dense-solve cutoff: systems below this dimension use LU.
inline constexpr std::size_t kDenseCutoff = 4096;

}  // namespace aep
