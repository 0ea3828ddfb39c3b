#include "aep/oracle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <string>

#include "aep/errors.hpp"

namespace aep {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

void check_ring(int ring_size, int limit) {
  if (ring_size < 2) fail(ErrorCode::InvalidConfig, "ring size must be at least 2");
  if (ring_size > limit) {
    fail(ErrorCode::DimensionTooLarge, "ring size " + std::to_string(ring_size) + " exceeds " + std::to_string(limit));
  }
}

int wrap(int x, int L) {
  const int r = x % L;
  return r < 0 ? r + L : r;
}

// Poisson weights w_n = e^{-m} m^n / n!, in log space so large means do not underflow.
double poisson_weight(double mean, std::size_t n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mean + static_cast<double>(n) * std::log(mean) - std::lgamma(static_cast<double>(n) + 1.0));
}

template <class Step>
Eigen::VectorXd uniformize(double rate, double t, const Eigen::VectorXd& v, double tol, Step&& step) {
  if (!(t >= 0.0)) fail(ErrorCode::InvalidConfig, "semigroup time must be nonnegative");
  if (t == 0.0 || rate == 0.0) return v;
  const double mean = rate * t;
  const std::size_t n_max = poisson_truncation(mean, tol);
  Eigen::VectorXd term = v;
  Eigen::VectorXd out = poisson_weight(mean, 0) * v;
  for (std::size_t n = 1; n <= n_max; ++n) {
    term = step(term);
    out += poisson_weight(mean, n) * term;
  }
  return out;
}

}  // namespace

GeneratorMatrix build_generator(int ring_size, const JumpLaw& law, Flavor flavor) {
  check_ring(ring_size, kMaxOracleRing);
  const int L = ring_size;
  const std::size_t dim = std::size_t{1} << L;
  const auto& entries = flavor == Flavor::Full ? law.entries() : law.symmetrized_entries();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(dim * static_cast<std::size_t>(L) * entries.size() / 2 + dim);
  GeneratorMatrix g;
  g.ring_size = L;
  g.flavor = flavor;
  for (std::size_t s = 0; s < dim; ++s) {
    double exit = 0.0;
    for (int x = 0; x < L; ++x) {
      if (!((s >> x) & 1u)) continue;
      for (const auto& [z, p] : entries) {
        if (p == 0.0) continue;
        const int y = wrap(x + z, L);
        if (y == x || ((s >> y) & 1u)) continue;
        const std::size_t target = s ^ (std::size_t{1} << x) ^ (std::size_t{1} << y);
        trip.emplace_back(static_cast<int>(s), static_cast<int>(target), p);
        exit += p;
      }
    }
    trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -exit);
    g.max_exit_rate = std::max(g.max_exit_rate, exit);
  }
  g.q.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  g.q.setFromTriplets(trip.begin(), trip.end());
  g.q.makeCompressed();
  return g;
}

Eigen::VectorXd product_measure(int ring_size, double rho) {
  check_ring(ring_size, kMaxOracleRing);
  const std::size_t dim = std::size_t{1} << ring_size;
  Eigen::VectorXd pi(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    const int k = __builtin_popcountll(s);
    pi[static_cast<Eigen::Index>(s)] = std::pow(rho, k) * std::pow(1.0 - rho, ring_size - k);
  }
  return pi;
}

double stationarity_residual(const GeneratorMatrix& g, double rho) {
  const Eigen::VectorXd pi = product_measure(g.ring_size, rho);
  const Eigen::VectorXd r = g.q.transpose() * pi;
  return r.cwiseAbs().maxCoeff();
}

std::size_t poisson_truncation(double mean, double tol) {
  if (mean <= 0.0) return 0;
  // smallest N with P(Poisson(mean) > N) = P(N + 1, mean) < tol
  auto n = static_cast<std::size_t>(std::floor(mean));
  while (boost::math::gamma_p(static_cast<double>(n) + 1.0, mean) >= tol) ++n;
  return n;
}

Eigen::VectorXd semigroup_apply(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v, double tol) {
  const double rate = g.max_exit_rate;
  return uniformize(rate, t, v, tol, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return x + (g.q * x) / rate;
  });
}

Eigen::VectorXd semigroup_apply_left(const GeneratorMatrix& g, double t, const Eigen::VectorXd& v, double tol) {
  const double rate = g.max_exit_rate;
  const SpMat qt = g.q.transpose();
  return uniformize(rate, t, v, tol, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return x + (qt * x) / rate;
  });
}

std::vector<double> exact_two_point(int ring_size, double rho, const JumpLaw& law, double t) {
  check_ring(ring_size, kMaxExactRing);
  chi_of(rho);
  const int L = ring_size;
  const GeneratorMatrix g = build_generator(L, law, Flavor::Full);
  const Eigen::VectorXd pi = product_measure(L, rho);
  const auto dim = static_cast<Eigen::Index>(g.dimension());
  Eigen::VectorXd f(dim);
  for (Eigen::Index s = 0; s < dim; ++s) f[s] = static_cast<double>(s & 1) - rho;
  const Eigen::VectorXd u = semigroup_apply(g, t, f);
  // S(x,t) = E[(eta_0(t) - rho)(eta_{-x}(0) - rho)] by translation invariance
  std::vector<double> out(static_cast<std::size_t>(L), 0.0);
  for (int x = 0; x < L; ++x) {
    const int site = wrap(-x, L);
    double acc = 0.0;
    for (Eigen::Index s = 0; s < dim; ++s) acc += pi[s] * (static_cast<double>((s >> site) & 1) - rho) * u[s];
    out[static_cast<std::size_t>(x)] = acc;
  }
  return out;
}

WrappedMoments wrapped_moments(const std::vector<double>& s, double center) {
  const auto L = static_cast<std::int64_t>(s.size());
  WrappedMoments m;
  for (std::int64_t x = 0; x < L; ++x) {
    const double v = s[static_cast<std::size_t>(x)];
    m.mass += v;
    if (2 * x == L) {
      const double h = static_cast<double>(L) / 2.0;
      m.second_about += 0.5 * v * ((h - center) * (h - center) + (-h - center) * (-h - center));
      continue;
    }
    const double xw = static_cast<double>(2 * x < L ? x : x - L);
    m.first += xw * v;
    m.second_about += (xw - center) * (xw - center) * v;
  }
  return m;
}

DisplacementMoments exact_displacement_moments(int ring_size, double rho, const JumpLaw& law, double t) {
  check_ring(ring_size, kMaxExactRing);
  const Density density = Density::make(rho);
  if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "displacement moments need t > 0");
  const int L = ring_size;
  const int env = L - 1;  // relative sites 1..L-1, bit k-1
  const std::size_t dim = std::size_t{1} << env;

  // Environment seen from the second-class particle: rate matrix Q and the
  // rate-weighted displacement matrices Q1 = rate * d, Q2 = rate * d^2.
  std::vector<Eigen::Triplet<double>> tq, t1, t2;
  double max_exit = 0.0;
  const auto occupied = [](std::size_t e, int k) { return ((e >> (k - 1)) & 1u) != 0; };
  const auto recenter = [&](std::size_t e, int u) {
    // new relative position of old relative site k is k - u (mod L)
    std::size_t out = 0;
    for (int k = 1; k < L; ++k) {
      if (!occupied(e, k)) continue;
      const int nk = wrap(k - u, L);
      out |= std::size_t{1} << (nk - 1);
    }
    return out;
  };
  for (std::size_t e = 0; e < dim; ++e) {
    double exit = 0.0;
    const auto add = [&](std::size_t target, double rate, int d) {
      tq.emplace_back(static_cast<int>(e), static_cast<int>(target), rate);
      if (d != 0) {
        t1.emplace_back(static_cast<int>(e), static_cast<int>(target), rate * d);
        t2.emplace_back(static_cast<int>(e), static_cast<int>(target), rate * d * d);
      }
      exit += rate;
    };
    for (const auto& [z, p] : law.entries()) {
      // first-class particles
      for (int u = 1; u < L; ++u) {
        if (!occupied(e, u)) continue;
        const int v = wrap(u + z, L);
        if (v == u) continue;
        if (v == 0) {
          // swap with the second-class particle, which lands on u
          std::size_t moved = e & ~(std::size_t{1} << (u - 1));
          std::size_t target = recenter(moved, u);
          target |= std::size_t{1} << (wrap(-u, L) - 1);
          add(target, p, -z);
        } else if (!occupied(e, v)) {
          add(e ^ (std::size_t{1} << (u - 1)) ^ (std::size_t{1} << (v - 1)), p, 0);
        }
      }
      // the second-class particle
      const int v = wrap(z, L);
      if (v != 0 && !occupied(e, v)) add(recenter(e, v), p, z);
    }
    tq.emplace_back(static_cast<int>(e), static_cast<int>(e), -exit);
    max_exit = std::max(max_exit, exit);
  }
  const auto n = static_cast<Eigen::Index>(dim);
  SpMat q(n, n), q1(n, n), q2(n, n);
  q.setFromTriplets(tq.begin(), tq.end());
  q1.setFromTriplets(t1.begin(), t1.end());
  q2.setFromTriplets(t2.begin(), t2.end());

  // exp(t [[Q, Q1, Q2], [0, Q, 2 Q1], [0, 0, Q]]) applied to (0, 0, 1):
  // the top block is E[X^2 | start], the middle block 2 E[X | start].
  const int range = law.range();
  Eigen::VectorXd top = Eigen::VectorXd::Zero(n), mid = Eigen::VectorXd::Zero(n), bot = Eigen::VectorXd::Ones(n);
  const double rate = max_exit;
  const double mean = rate * t;
  Eigen::VectorXd acc_top = poisson_weight(mean, 0) * top, acc_mid = poisson_weight(mean, 0) * mid;
  // P^n grows at most like (1 + n)^2 R^2 in the coupled blocks; truncate on that envelope
  std::size_t nmax = static_cast<std::size_t>(std::floor(mean));
  while (true) {
    const double tail = boost::math::gamma_p(static_cast<double>(nmax) + 1.0, mean);
    const double envelope = (2.0 + nmax + 3.0 * std::sqrt(mean + 1.0)) * (2.0 + nmax + 3.0 * std::sqrt(mean + 1.0));
    if (tail * envelope * range * range < 1e-14) break;
    ++nmax;
  }
  for (std::size_t k = 1; k <= nmax; ++k) {
    const Eigen::VectorXd ntop = top + (q * top + q1 * mid + q2 * bot) / rate;
    const Eigen::VectorXd nmid = mid + (q * mid + 2.0 * (q1 * bot)) / rate;
    const Eigen::VectorXd nbot = bot + (q * bot) / rate;
    top = ntop;
    mid = nmid;
    bot = nbot;
    const double w = poisson_weight(mean, k);
    acc_top += w * top;
    acc_mid += w * mid;
  }

  double ex = 0.0, ex2 = 0.0;
  for (std::size_t e = 0; e < dim; ++e) {
    const int k = __builtin_popcountll(e);
    const double w = std::pow(rho, k) * std::pow(1.0 - rho, env - k);
    ex2 += w * acc_top[static_cast<Eigen::Index>(e)];
    ex += 0.5 * w * acc_mid[static_cast<Eigen::Index>(e)];
  }
  DisplacementMoments m;
  m.mean = ex;
  m.second = ex2;
  const double c = (1.0 - 2.0 * density.rho) * law.drift() * t;
  m.centered = ex2 - 2.0 * c * ex + c * c;
  m.diffusivity = m.centered / t;
  return m;
}

double exact_diffusivity(int ring_size, double rho, const JumpLaw& law, double t) {
  return exact_displacement_moments(ring_size, rho, law, t).diffusivity;
}

double exact_diffusivity_wrapped(int ring_size, double rho, const JumpLaw& law, double t) {
  check_ring(ring_size, kMaxExactRing);
  if (!(t > 0.0)) fail(ErrorCode::DegenerateTime, "D(t) is undefined at t = 0");
  const double cone = law.range() * (t + 6.0 * std::sqrt(t));
  if (!(cone < ring_size / 2.0)) {
    fail(ErrorCode::TimeTooLarge, "light cone " + std::to_string(cone) + " does not fit half the ring");
  }
  const double chi = chi_of(rho);
  const auto s = exact_two_point(ring_size, rho, law, t);
  const double c = (1.0 - 2.0 * rho) * law.drift() * t;
  return wrapped_moments(s, c).second_about / (chi * t);
}

int LocalFunction::diameter() const {
  int lo = 0, hi = 0;
  bool any = false;
  for (const auto& term : terms) {
    for (int a : term.sites) {
      lo = any ? std::min(lo, a) : a;
      hi = any ? std::max(hi, a) : a;
      any = true;
    }
  }
  return hi - lo;
}

double ring_h1_seminorm(const LocalFunction& phi, double lambda, int ring_size, double rho, const JumpLaw& law,
                        Flavor flavor) {
  check_ring(ring_size, kMaxOracleRing);
  if (!(lambda > 0.0)) fail(ErrorCode::NonPositiveLambda, "lambda must be positive");
  const double chi = chi_of(rho);
  if (!(chi > 0.0)) fail(ErrorCode::OutOfRange, "rho must be strictly between 0 and 1");
  const int L = ring_size;
  if (2 * phi.diameter() >= L) {
    fail(ErrorCode::SupportTooWide, "support diameter " + std::to_string(phi.diameter()) + " not below L/2");
  }
  const GeneratorMatrix g = build_generator(L, law, flavor);
  const Eigen::VectorXd pi = product_measure(L, rho);
  const auto dim = static_cast<Eigen::Index>(g.dimension());
  const double scale = 1.0 / std::sqrt(chi);

  Eigen::VectorXd big_phi = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    double acc = 0.0;
    for (int x = 0; x < L; ++x) {
      for (const auto& term : phi.terms) {
        double prod = term.coefficient;
        for (int a : term.sites) prod *= (static_cast<double>((s >> wrap(x + a, L)) & 1) - rho) * scale;
        acc += prod;
      }
    }
    big_phi[s] = acc;
  }

  SpMat a(dim, dim);
  a.setIdentity();
  a = lambda * a - g.q;
  Eigen::VectorXd u;
  if (static_cast<std::size_t>(dim) < kDenseCutoff) {
    const Eigen::MatrixXd dense(a);
    u = dense.partialPivLu().solve(big_phi);
  } else if (flavor == Flavor::Symmetric) {
    Eigen::SparseMatrix<double> col(a);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(100000);
    cg.compute(col);
    u = cg.solve(big_phi);
    if (cg.info() != Eigen::Success) fail(ErrorCode::SolverFailure, "conjugate gradient did not converge");
  } else {
    Eigen::SparseMatrix<double> col(a);
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> solver;
    solver.setTolerance(1e-13);
    solver.setMaxIterations(100000);
    solver.compute(col);
    u = solver.solve(big_phi);
    if (solver.info() != Eigen::Success) fail(ErrorCode::SolverFailure, "BiCGSTAB did not converge");
  }
  const double residual = (a * u - big_phi).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10 * std::max(1.0, big_phi.cwiseAbs().maxCoeff()))) {
    fail(ErrorCode::SolverFailure, "resolvent residual " + std::to_string(residual));
  }
  return pi.cwiseProduct(big_phi).dot(u) / static_cast<double>(L);
}

}  // namespace aep
