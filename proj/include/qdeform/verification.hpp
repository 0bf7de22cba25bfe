#pragma once

// Identity suites behind `qdeform verify` and the acceptance checks.
//
// A suite reports the largest defect it saw against a fixed tolerance.
// A survey reports measured numbers with no pass/fail attached; it is used
// where the expected outcome is unknown or known to be non-zero.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdeform/dynamics.hpp"
#include "qdeform/exact.hpp"
#include "qdeform/hilbert.hpp"
#include "qdeform/lattice.hpp"
#include "qdeform/qcore.hpp"
#include "qdeform/schrodinger.hpp"

#ifndef QDEFORM_VERSION
#define QDEFORM_VERSION "0.0.0"
#endif

namespace qdeform::verify {

struct SuiteResult {
  std::string name;
  int criterion = 0;
  double max_defect = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  long samples = 0;
  std::string measure;  ///< what the defect is relative to
  std::vector<std::pair<std::string, std::string>> parameters;
};

struct Survey {
  std::string name;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

struct Report {
  std::string version = QDEFORM_VERSION;
  double q = 2.0;
  std::string lattice_summary;
  std::vector<SuiteResult> suites;
  std::vector<Survey> surveys;
  std::vector<std::pair<std::string, std::string>> flags;
  std::vector<std::string> warnings;

  bool passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
  }
  const SuiteResult* find(const std::string& name) const {
    for (const auto& s : suites) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
  void warn(const std::string& w) {
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
  }
};

struct Options {
  /// Deformation of the run; added to every parameterized grid.
  double q = 2.0;
  /// Seed for the random draws inside suites.
  unsigned long long seed = 20240501ULL;
};

namespace detail {

inline std::string fmt(double v) { return format_number(v); }

inline std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

/// Running maximum of a defect.
struct Max {
  double value = 0.0;
  long samples = 0;
  void add(double d) {
    ++samples;
    if (std::isnan(d)) {
      value = INFINITY;
    } else {
      value = std::max(value, d);
    }
  }
};

inline SuiteResult make(std::string name, int criterion, const Max& m, double tol,
                        std::string measure,
                        std::vector<std::pair<std::string, std::string>> params = {}) {
  SuiteResult r;
  r.name = std::move(name);
  r.criterion = criterion;
  r.max_defect = m.value;
  r.tolerance = tol;
  r.passed = m.value <= tol;
  r.samples = m.samples;
  r.measure = std::move(measure);
  r.parameters = std::move(params);
  return r;
}

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// grid plus q, sorted, duplicates and near-classical values removed.
inline std::vector<double> with_run_q(std::vector<double> grid, double q) {
  if (std::abs(q - 1.0) > kDefaultEpsilonOne) grid.push_back(q);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// Relative rounding left in an order-m difference quotient on a q lattice:
/// eps / |q-1|^m.
inline double rounding_floor(double q, int order) {
  return std::numeric_limits<double>::epsilon() / std::pow(std::abs(q - 1.0), order);
}

/// Tolerance for checks that are exact up to rounding: `base`, raised to
/// 64 rounding floors of the q closest to one.
inline double rounding_tolerance(const std::vector<double>& qs, int order, double base) {
  double t = base;
  for (double q : qs) t = std::max(t, 64.0 * rounding_floor(q, order));
  return t;
}

/// A positive lattice from about x_min up to x_max for any q.
inline LatticePtr span_lattice(double q, double x_max, double x_min, std::size_t cap = 256) {
  const DeformationParameter d(q);
  auto count = static_cast<std::size_t>(std::ceil(std::log(x_max / x_min) / std::abs(std::log(q)))) + 1;
  count = std::clamp<std::size_t>(count, 4, cap);
  return GeometricLattice::build(q < 1.0 ? x_max : x_max * q, d, count);
}

/// Lattice below `top` with at most n points and at most `ratio` between
/// its largest and smallest point; difference quotients at tiny x lose
/// everything to cancellation otherwise.
inline LatticePtr bounded_lattice(double top, double q, std::size_t n, double ratio = 1e4) {
  const auto fit = static_cast<std::size_t>(std::log(ratio) / std::abs(std::log(q))) + 2;
  return GeometricLattice::build(q < 1.0 ? top : top * q, DeformationParameter(q), std::min(n, fit));
}

inline std::vector<std::size_t> rows_with_successors(const GeometricLattice& lat, int reach) {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (lat.shift(i, Member::q, reach)) r.push_back(i);
  }
  return r;
}

inline double poly(const std::vector<double>& c, double x) {
  double a = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) a = a * x + c[k];
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// q-combinatorics

inline std::vector<SuiteResult> combinatorics_suites(const Options& o) {
  using detail::Max;
  const auto qs = detail::with_run_q({0.5, 0.8, 0.95, 1.05, 1.25, 2.0}, o.q);
  const std::string grid = detail::list(qs);
  Max pascal, symmetry, binomial, scaling;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> xy(0.1, 2.0);
  std::uniform_int_distribution<int> nn(0, 12);
  for (double qv : qs) {
    const DeformationParameter q(qv);
    for (long n = 1; n <= 30; ++n) {
      for (long r = 0; r <= n; ++r) {
        const double lhs = q_binomial(n, r, q);
        const double rhs = q_binomial(n - 1, r - 1, q) + std::pow(qv, r) * q_binomial(n - 1, r, q);
        pascal.add(detail::rel(lhs, rhs));
        symmetry.add(detail::rel(lhs, q_binomial(n, n - r, q)));
      }
    }
    for (int k = 0; k < 500; ++k) {
      const double x = xy(rng);
      const double y = xy(rng);
      const long n = nn(rng);
      binomial.add(detail::rel(basic_binomial_sum(x, y, n, q), basic_binomial_power(x, y, n, q)));
    }
    for (long n = 1; n <= 40; ++n) {
      scaling.add(detail::rel(basic_number(n, q.inverse()), std::pow(qv, 1.0 - n) * basic_number(n, q)));
    }
  }
  const std::vector<std::pair<std::string, std::string>> p{{"q", grid}};
  return {
      detail::make("combinatorics.q_pascal", 1, pascal, 1e-10, "relative", p),
      detail::make("combinatorics.binomial_symmetry", 1, symmetry, 1e-10, "relative", p),
      detail::make("combinatorics.basic_binomial_sum_vs_product", 1, binomial, 1e-10, "relative",
                   {{"q", grid}, {"draws_per_q", "500"}, {"x,y", "uniform(0.1,2)"}, {"n", "0..12"}}),
      detail::make("combinatorics.inverse_basic_number_scaling", 1, scaling, 1e-10, "relative", p),
  };
}

/// Exact rational check of the q-Pascal rule and symmetry over n <= 20.
inline SuiteResult exact_pascal_suite() {
  detail::Max m;
  using exact::Rational;
  for (const Rational& q : {Rational(1, 2), Rational(4, 5), Rational(5, 4), Rational(2)}) {
    for (long n = 1; n <= 20; ++n) {
      for (long r = 1; r < n; ++r) {
        const Rational lhs = exact::q_binomial(n, r, q);
        const Rational rhs = exact::q_binomial(n - 1, r - 1, q) + exact::pow(q, r) * exact::q_binomial(n - 1, r, q);
        m.add(lhs == rhs && lhs == exact::q_binomial(n, n - r, q) ? 0.0 : 1.0);
      }
    }
  }
  return detail::make("combinatorics.exact_rational_pascal", 1, m, 0.0, "exact (0 = identical)",
                      {{"q", "1/2,4/5,5/4,2"}, {"n", "1..20"}});
}

// ---------------------------------------------------------------------------
// basic exponential

inline std::vector<SuiteResult> exponential_suites(const Options& o, Report& report) {
  using detail::Max;
  const auto qs = detail::with_run_q({0.5, 0.8, 1.25, 2.0}, o.q);
  const std::string grid = detail::list(qs);
  Max inverse, jde, dae, addition;
  std::vector<double> series_dae;
  long reciprocal = 0;
  SeriesOptions direct;
  direct.allow_reciprocal = false;
  for (double qv : qs) {
    const DeformationParameter q(qv);
    const double r = std::min({q_exp_radius(q), q_exp_radius(q.inverse()), 3.0 / 0.9});
    for (int k = -20; k <= 20; ++k) {
      const double x = 0.9 * r * k / 20.0;
      const cplx a = q_exp(x, q, direct).value;
      const cplx b = q_exp(-x, q.inverse(), direct).value;
      inverse.add(std::abs(a * b - 1.0));
      if (q_exp(x, q).domain_flag == DomainFlag::via_reciprocal) ++reciprocal;
    }

    const auto lat = detail::bounded_lattice(1.0, qv, 16);
    for (double a : {-2.0, -0.5, 0.5, 1.0}) {
      if (std::abs(a) >= q_exp_radius(q)) continue;
      const auto e = LatticeFunction::sample(lat, [&](double x) { return q_exp(a * x, q).value; });
      const auto d = jackson_derivative(e);
      // Relative to the sampled magnitude: for q > 1 E_q(ax) has real zeros.
      for (std::size_t i : detail::rows_with_successors(*lat, 1)) {
        const std::size_t j = *lat->shift(i, Member::q, 1);
        jde.add(std::abs(d[i] - a * e[i]) / (std::abs(a) * std::max(std::abs(e[i]), std::abs(e[j]))));
      }
    }

    // A lattice reaching down to 1e-16 of the upper limit makes the
    // truncated quadrature exact to rounding. When that needs more than
    // 4096 points the untruncated Jackson series is summed instead.
    const bool on_lattice = std::log(1e16) / std::abs(std::log(qv)) < 4095.0;
    if (!on_lattice) series_dae.push_back(qv);
    const auto big = detail::span_lattice(qv, 1.0, 1e-16, 4096);
    for (double a : {-1.5, -0.5, 0.7}) {
      if (a * 1.0 >= q_exp_radius(q)) continue;
      const auto f = LatticeFunction::sample(big, [&](double y) { return q_exp(a * y, q).value; });
      for (std::size_t n : {0ul, 1ul, 3ul}) {
        const double x = big->lambda(n);
        cplx value;
        if (on_lattice) {
          const IntegralResult ir = jackson_integral(f, x);
          if (ir.warning) report.warn(*ir.warning);
          value = ir.value;
        } else {
          value = jackson_integral_function([&](double y) { return q_exp(a * y, q).value; }, x, qv);
        }
        dae.add(std::abs(value - (q_exp(a * x, q).value - 1.0) / a));
      }
    }

    // sum_k (x+y)^(k)/[k]! = E_q(x) E_{1/q}(y); for q > 1 the series
    // needs |y| (q - 1) < 1.
    const double ymax = qv > 1.0 ? std::min(1.0, 0.5 / (qv - 1.0)) : 1.0;
    const double xmax = std::min(1.0, 0.5 * std::min(q_exp_radius(q), q_exp_radius(q.inverse())));
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) {
        const double x = xmax * i / 4.0;
        const double y = ymax * j / 4.0;
        double series = 0.0;
        for (long k = 0; k < 400; ++k) {
          const double t = basic_binomial_power(x, y, k, q) / basic_factorial(k, q);
          series += t;
          if (k > 5 && std::abs(t) < 1e-18 * std::max(1.0, std::abs(series))) break;
        }
        const double rhs = (q_exp(x, q).value * q_exp(y, q.inverse()).value).real();
        addition.add(detail::rel(series, rhs));
      }
    }
  }
  report.flags.push_back({"via_reciprocal.exponential_points", std::to_string(reciprocal)});
  const std::vector<std::pair<std::string, std::string>> p{{"q", grid}};
  return {
      detail::make("exponential.inverse_identity", 2, inverse, 1e-10,
                   "absolute |E_q(x)E_{1/q}(-x) - 1|, direct summation",
                   {{"q", grid}, {"x", "41 points in |x| <= 0.9 min(R_q, R_1/q, 3.33)"}}),
      detail::make("exponential.jackson_eigen_relation", 2, jde, 1e-8,
                   "relative to |a| max(|E(x)|,|E(qx)|), interior rows",
                   {{"q", grid}, {"a", "-2,-0.5,0.5,1"}}),
      detail::make("exponential.jackson_antiderivative", 2, dae, 1e-9, "absolute",
                   {{"q", grid},
                    {"a", "-1.5,-0.5,0.7"},
                    {"quadrature", "lattice down to 1e-16 x; untruncated series for q = " +
                                       (series_dae.empty() ? std::string("none") : detail::list(series_dae))}}),
      detail::make("exponential.addition_law", 2, addition, 1e-9, "relative", p),
  };
}

// ---------------------------------------------------------------------------
// Jackson calculus

inline std::vector<SuiteResult> jackson_suites(const Options& o) {
  using detail::Max;
  std::mt19937_64 rng(o.seed + 1);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 6);
  auto random_poly = [&](int d) {
    std::vector<double> c(static_cast<std::size_t>(d) + 1);
    for (double& v : c) v = coef(rng);
    return c;
  };

  Max ftc, leib1, leib2, mono, taylor;
  const auto ftc_qs = detail::with_run_q({0.5, 2.0}, o.q);
  for (double qv : ftc_qs) {
    const auto lat = detail::span_lattice(qv, 1.5, 1e-3);
    for (int t = 0; t < 200; ++t) {
      const auto c = random_poly(deg(rng));
      const auto f = LatticeFunction::sample(lat, [&](double x) { return detail::poly(c, x); });
      const auto back = jackson_derivative(cumulative_jackson_integral(f));
      const double s = std::max(f.max_abs(), 1e-300);
      for (std::size_t i : detail::rows_with_successors(*lat, 1)) ftc.add(std::abs(back[i] - f[i]) / s);
    }
  }

  const auto leib_qs = detail::with_run_q({0.6, 1.7}, o.q);
  for (double qv : leib_qs) {
    const auto lat = detail::bounded_lattice(2.0, qv, 12, 1e3);
    const auto rows = detail::rows_with_successors(*lat, 1);
    for (int t = 0; t < 50; ++t) {
      const auto cf = random_poly(deg(rng) % 6);
      const auto cg = random_poly(deg(rng) % 6);
      const auto f = LatticeFunction::sample(lat, [&](double x) { return detail::poly(cf, x); });
      const auto g = LatticeFunction::sample(lat, [&](double x) { return detail::poly(cg, x); });
      const auto lhs = jackson_derivative(f * g);
      const auto df = jackson_derivative(f);
      const auto dg = jackson_derivative(g);
      const auto a = df * g + dilate(f) * dg;
      const auto b = df * dilate(g) + f * dg;
      double s = 1e-300;
      for (std::size_t i : rows) {
        s = std::max({s, std::abs(lhs[i]), std::abs((df * g)[i]), std::abs((f * dg)[i])});
      }
      for (std::size_t i : rows) {
        leib1.add(std::abs(lhs[i] - a[i]) / s);
        leib2.add(std::abs(lhs[i] - b[i]) / s);
      }
    }
  }

  const auto mono_qs = detail::with_run_q({0.6, 1.5}, o.q);
  for (double qv : mono_qs) {
    const DeformationParameter q(qv);
    const auto lat = GeometricLattice::build(2.0, q, 20);
    for (int n = 0; n <= 6; ++n) {
      const auto d = jackson_derivative(LatticeFunction::sample(lat, [n](double x) { return std::pow(x, n); }));
      const auto dm = jackson_derivative(LatticeFunction::sample(lat, [n](double x) { return std::pow(x, -n); }));
      for (std::size_t i : detail::rows_with_successors(*lat, 1)) {
        const double x = lat->point(i);
        const double bn = basic_number(n, q);
        const double e1 = bn * std::pow(x, n - 1);
        const double e2 = -bn / std::pow(qv, n) / std::pow(x, n + 1);
        mono.add(std::abs(d[i].real() - e1) / std::max(1.0, std::abs(e1)));
        mono.add(std::abs(dm[i].real() - e2) / std::max(1.0, std::abs(e2)));
      }
    }
  }

  const auto taylor_qs = detail::with_run_q({0.7, 1.6}, o.q);
  for (double qv : taylor_qs) {
    const DeformationParameter q(qv);
    const auto lat = GeometricLattice::build(2.0, q, 12);
    for (int order = 0; order <= 4; ++order) {
      for (int t = 0; t < 10; ++t) {
        const auto c = random_poly(order);
        const auto f = LatticeFunction::sample(lat, [&](double x) { return detail::poly(c, x); });
        // Expand about the largest point with `order` successors so the
        // reconstruction interpolates toward 0 instead of extrapolating away.
        const std::size_t a = qv < 1.0 ? 0 : lat->size() - 1 - static_cast<std::size_t>(order);
        const auto coeffs = q_taylor_coefficients(f, a, order);
        const double s = std::max(1.0, f.max_abs());
        for (std::size_t i = 0; i < lat->size(); ++i) {
          taylor.add(std::abs(q_taylor_evaluate(coeffs, lat->point(a), lat->point(i), q) - f[i]) / s);
        }
      }
    }
  }

  return {
      detail::make("jackson.fundamental_theorem", 3, ftc, 1e-10, "relative to max|f|",
                   {{"q", detail::list(ftc_qs)}, {"polynomials_per_q", "200"}, {"degree", "0..6"}}),
      detail::make("jackson.leibniz_dilate_first", 3, leib1, 1e-10, "relative to max term",
                   {{"q", detail::list(leib_qs)}}),
      detail::make("jackson.leibniz_dilate_second", 3, leib2, 1e-10, "relative to max term",
                   {{"q", detail::list(leib_qs)}}),
      detail::make("jackson.monomial_rules", 3, mono, detail::rounding_tolerance(mono_qs, 1, 1e-12),
                   "relative to max(1,|exact|); tolerance max(1e-12, 64 eps/|q-1|)",
                   {{"q", detail::list(mono_qs)}, {"n", "0..6 and -6..0"}}),
      detail::make("jackson.q_taylor_reconstruction", 3, taylor, 1e-10, "relative to max(1,max|f|)",
                   {{"q", detail::list(taylor_qs)}, {"order", "0..4, degree == order"}}),
  };
}

// ---------------------------------------------------------------------------
// Fokker-Planck

inline FPProblem brownian_problem(double q, double alpha, double gamma = 1.0) {
  FPProblem p;
  p.drift = DriftSpec::brownian(gamma);
  p.diffusion = DiffusionSpec::from_brownian(gamma, alpha);
  // The lattice recurrence stays positive only while alpha (q-1) x^2 < 1
  // (q > 1) or alpha q (1-q) x^2 < 1 (q < 1).
  const double bound = q < 1.0 ? alpha * q * (1.0 - q) : alpha * (q - 1.0);
  const double x_max = std::min(3.0, 0.9 / std::sqrt(bound));
  p.lattice = detail::span_lattice(q, x_max, 0.05);
  return p;
}

inline std::vector<SuiteResult> fokker_planck_suites(const Options& o, Report& report) {
  using detail::Max;
  const auto qs = detail::with_run_q({0.8, 1.25}, o.q);
  Max scaled, flux, norm, phi, lattice_rhs;
  Survey literal{"fp.stationary_residual_literal_qx", {}, ""};
  long reciprocal = 0;
  for (double qv : qs) {
    const DeformationParameter q(qv);
    for (double alpha : {0.5, 1.0}) {
      FPProblem p = brownian_problem(qv, alpha);
      const auto f = [&](double x) { return q_exp(-alpha * x * x, q).value; };
      const double rs = stationary_residual(f, p, DilatationConvention::argument_scaling);
      const double rl = stationary_residual(f, p, DilatationConvention::literal_qx);
      scaled.add(rs);
      literal.values.push_back({"q=" + detail::fmt(qv) + ",alpha=" + detail::fmt(alpha), rl});

      // flux / J2 equals the zero-flux bracket of the same convention.
      for (auto conv : {DilatationConvention::argument_scaling, DilatationConvention::literal_qx}) {
        p.convention = conv;
        const LatticeFunction fl = fp_flux(std::function<cplx(double)>(f), p);
        const double s = conv == DilatationConvention::argument_scaling ? std::sqrt(qv) : qv;
        const std::vector<bool> edge = p.lattice->edge_mask();
        for (std::size_t i = 0; i < fl.size(); ++i) {
          if (edge[i]) continue;
          const double x = p.lattice->point(i);
          const cplx bracket = jackson_derivative_at(f, x, qv) + alpha * x * (qv * f(s * x) + f(x));
          flux.add(std::abs(fl[i] / p.diffusion.J2 - bracket));
        }
      }

      p.convention = DilatationConvention::argument_scaling;
      const StationaryDensity st = fp_stationary(p);
      for (const auto& w : st.warnings) report.warn("fp_stationary(q=" + detail::fmt(qv) + "): " + w);
      for (DomainFlag fl : st.domain_flags) {
        if (fl == DomainFlag::via_reciprocal) ++reciprocal;
      }
      norm.add(std::abs(jackson_integral(st.density, p.lattice->lambda0()).value - 1.0));

      const LatticeFunction fl = fp_stationary_lattice(p);
      const OperatorMatrix l = fp_operator_matrix(p);
      const LatticeFunction r = l.apply(fl);
      const double scale = l.entries().cwiseAbs().rowwise().sum().maxCoeff() * fl.max_abs();
      std::vector<bool> skip(fl.size(), false);
      for (std::size_t b : l.boundary_rows()) skip[b] = true;
      for (std::size_t i = 0; i < fl.size(); ++i) {
        if (!skip[i]) lattice_rhs.add(std::abs(r[i]) / scale);
      }
    }
    // Phi for J1 = -gamma y against x^2 alpha/[2]_q.
    const DriftSpec lin = DriftSpec::linear(1.0);
    const DiffusionSpec dif = DiffusionSpec::from_brownian(1.0, 1.0);
    for (double x : {0.5, 1.0, 2.0}) {
      phi.add(detail::rel(phi_potential(lin, dif, x, q), x * x / basic_number(2, q)));
    }
  }
  {
    const DeformationParameter half(0.5);
    phi.add(std::abs(phi_potential(DriftSpec::linear(1.0), DiffusionSpec::from_brownian(1.0, 1.0), 1.0, half) -
                     2.0 / 3.0));
  }
  literal.note =
      "literal reading F(qx) of the dilatation; expected non-zero (series coefficients q^(k+1)+1 vs "
      "q^(2k+1)+1)";
  report.surveys.push_back(literal);
  report.flags.push_back({"via_reciprocal.fp_stationary_points", std::to_string(reciprocal)});

  // Exact coefficient oracle: [2k+2]_q == [k+1]_q (q^{k+1} + 1) makes
  // E_q(-alpha x^2) solve the argument-scaled equation term by term.
  Max oracle;
  Survey mismatch{"fp.literal_qx_coefficient_mismatch", {}, ""};
  using exact::Rational;
  for (const Rational& q : {Rational(4, 5), Rational(5, 4)}) {
    Rational worst(0);
    for (long k = 0; k <= 12; ++k) {
      const Rational lhs = exact::basic_number(2 * k + 2, q);
      const Rational sc = exact::basic_number(k + 1, q) * (exact::pow(q, k + 1) + 1);
      const Rational li = exact::basic_number(k + 1, q) * (exact::pow(q, 2 * k + 1) + 1);
      oracle.add(lhs == sc ? 0.0 : 1.0);
      const Rational d = lhs > li ? Rational(lhs - li) : Rational(li - lhs);
      if (k >= 1 && d > worst) worst = d;
    }
    mismatch.values.push_back({"q=" + boost::multiprecision::numerator(q).str() + "/" +
                                   boost::multiprecision::denominator(q).str() + ",max_k<=12",
                               static_cast<double>(worst)});
  }
  mismatch.note = "|[2k+2]_q - [k+1]_q (q^(2k+1)+1)| for 1 <= k <= 12, exact rationals";
  report.surveys.push_back(mismatch);

  const std::string grid = detail::list(qs);
  return {
      detail::make("fp.stationary_residual_argument_scaling", 4, scaled, 1e-8,
                   "absolute, interior rows, F = E_q(-alpha x^2)",
                   {{"q", grid}, {"alpha", "0.5,1"}, {"convention", "argument_scaling"}}),
      detail::make("fp.coefficient_oracle_argument_scaling", 4, oracle, 0.0,
                   "exact (0 = identical)", {{"q", "4/5,5/4"}, {"k", "0..12"}}),
      detail::make("fp.flux_equals_zero_flux_bracket", 4, flux, 1e-9, "absolute",
                   {{"q", grid}, {"convention", "argument_scaling,literal_qx"}}),
      detail::make("fp.stationary_normalization", 4, norm, 1e-10, "absolute", {{"q", grid}}),
      detail::make("fp.lattice_stationary_fixed_point", 4, lattice_rhs, 1e-12,
                   "relative to ||L||_inf max|F|", {{"q", grid}, {"convention", "literal_qx"}}),
      detail::make("fp.phi_potential", 4, phi, detail::rounding_tolerance(qs, 1, 1e-12),
                   "relative; tolerance max(1e-12, 64 eps/|q-1|)", {{"q", grid + ",0.5"}}),
  };
}

/// Spectral radius of the time-step matrices and what the eigenvalues of the
/// truncated Fokker-Planck operator predict for it.
inline void fokker_planck_stability_survey(Report& report) {
  FPProblem p = brownian_problem(0.8, 1.0);
  p.drift = DriftSpec::linear(1.0);
  p.lattice = GeometricLattice::build(3.0, DeformationParameter(0.8), 30);
  const OperatorMatrix l = fp_operator_matrix(p);
  Eigen::MatrixXcd a = l.entries();
  for (std::size_t r : l.boundary_rows()) a.row(static_cast<Eigen::Index>(r)).setZero();
  double lmin = INFINITY;
  double lmax = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i).real() == 0.0) continue;
    lmin = std::min(lmin, a(i, i).real());
    lmax = std::max(lmax, a(i, i).real());
  }
  Survey s{"fp.implicit_step_spectral_radius", {}, ""};
  s.values.push_back({"min_positive_operator_eigenvalue", lmin});
  s.values.push_back({"max_operator_eigenvalue", lmax});
  for (double dt : {1e-4, 1e-2, 1.0}) {
    s.values.push_back({"dt=" + detail::fmt(dt), fp_step_spectral_radius(p, dt, TimeScheme::implicit_euler)});
  }
  s.note =
      "q=0.8, J1=-x, J2=1, count 30. The truncated operator is triangular with positive diagonal, so "
      "the backward-Euler radius is max 1/|1-dt*lambda| and exceeds 1 unless dt*lambda_min > 2";
  report.surveys.push_back(s);

  const LatticeFunction f0 = fp_stationary_lattice(p);
  const FPTrajectory tr = fp_evolve(f0, p, 1.0, 100, TimeScheme::implicit_euler);
  Survey e{"fp.evolve_lattice_stationary", {}, "implicit, dt = 1, 100 steps, q = 0.8"};
  e.values.push_back({"max_deviation", (tr.states.back() - f0).max_abs()});
  e.values.push_back({"mass_drift", tr.mass_drift.back()});
  e.values.push_back({"frozen_rows", static_cast<double>(tr.frozen_rows.size())});
  report.surveys.push_back(e);
}

// ---------------------------------------------------------------------------
// free-particle quantum identities

inline std::vector<SuiteResult> free_particle_suites(const Options& o, Report& report) {
  using detail::Max;
  // D_q^2 leaves eps/(q-1)^2 of rounding; a run q where that floor is within
  // a decade of the 1e-8 tolerance cannot be checked and is reported instead.
  const bool run_q_reachable = std::abs(o.q - 1.0) <= kDefaultEpsilonOne || 10.0 * detail::rounding_floor(o.q, 2) <= 1e-8;
  const std::vector<double> grid_qs{0.9, 1.1, 1.25};
  const auto qs = run_q_reachable ? detail::with_run_q(grid_qs, o.q) : grid_qs;
  if (!run_q_reachable) {
    report.surveys.push_back({"quantum.free_particle_run_q_excluded",
                              {{"q", o.q}, {"rounding_floor", detail::rounding_floor(o.q, 2)}},
                              "second q-derivative rounding eps/(q-1)^2 is within a decade of the 1e-8 tolerance"});
  }
  Max residual, eq54, density, position;
  std::set<double> near_one_qs;
  for (double qv : qs) {
    const DeformationParameter q(qv);
    for (double k : {0.5, 1.0, 2.0}) {
      SchrodingerProblem p;
      // Near q = 1, D_q^2 divides series rounding by ((q-1)x)^2; keep kx <= 2
      // there so the plane-wave terms stay O(1).
      const bool near_one = std::abs(std::log(qv)) < 0.05;
      if (near_one) near_one_qs.insert(qv);
      p.lattice = plane_wave_lattice(q, k, 0.05, near_one ? 2.0 / k : 6.0);
      residual.add(free_particle_residual(k, p));
      eq54.add(eq54_pointwise_defect(k, p));
      const QPairedState pw = QPairedState::sample(
          p.lattice, [k](double x, const DeformationParameter& d) { return q_plane_wave(k, x, d); });
      const LatticeFunction rho = probability_density(pw);
      for (std::size_t i = 0; i < rho.size(); ++i) density.add(std::abs(rho[i] - 1.0));

      const OperatorMatrix x = position_matrix(p.lattice);
      const QPairedState other = QPairedState::sample(p.lattice, [](double y, const DeformationParameter& d) {
        return q_exp(cplx(-0.3 * y, 0.2), d).value;
      });
      position.add(std::abs(q_adjoint_defect(x, position_matrix(p.lattice, Member::q_inverse), pw, other)));
    }
  }
  const std::string grid = detail::list(qs);
  return {
      detail::make("quantum.free_particle_residual", 5, residual, 1e-8,
                   "max interior |D^2 phi + k^2 phi| / max|phi|",
                   {{"q", grid},
                    {"k", "0.5,1,2"},
                    {"lattice", "x in [0.05, min(6, 0.6 R/|k|)], at most 256 points; x <= 2/|k| for q = " +
                                    (near_one_qs.empty() ? std::string("none")
                                                         : detail::list({near_one_qs.begin(), near_one_qs.end()}))}}),
      detail::make("quantum.eq54_pointwise_defect", 5, eq54, 1e-8, "absolute, interior rows",
                   {{"q", grid}, {"k", "0.5,1,2"}}),
      detail::make("quantum.plane_wave_density", 5, density, 1e-8, "absolute |rho - N^2|, N = 1",
                   {{"q", grid}}),
      detail::make("hilbert.position_adjoint_defect", 5, position, 1e-12, "absolute",
                   {{"q", grid}}),
  };
}

// ---------------------------------------------------------------------------
// spectral / Hilbert

struct SpectralConfig {
  double q;
  double lambda0;
  std::size_t count;
  bool oscillator;
};

inline PotentialSpec oscillator_potential() {
  return PotentialSpec::from_function("oscillator",
                                      [](double x, const DeformationParameter&) { return 0.5 * x * x; });
}

inline std::vector<SuiteResult> spectral_suites(const Options& o, Report& report) {
  using detail::Max;
  std::vector<SpectralConfig> configs{{0.5, 2.0, 12, false}, {0.8, 3.0, 20, true}, {2.0, 4.0, 12, false}};
  if (std::abs(o.q - 1.0) > kDefaultEpsilonOne &&
      std::none_of(configs.begin(), configs.end(), [&](const SpectralConfig& c) { return c.q == o.q; })) {
    configs.push_back({o.q, o.q < 1.0 ? 2.0 : 2.0 * o.q, 12, false});
  }
  Max gram, round_trip, parseval, spectral_mean, norm_const, fluct, residual, twomode_gap;
  Survey imag{"spectral.eigenvalue_imaginary_parts", {}, "max |Im E| over retained levels"};
  Survey herm{"hilbert.hamiltonian_q_adjoint_defect", {}, ""};
  Survey partner{"spectral.literal_partner_residual", {}, ""};
  Survey positivity{"hilbert.norm_positivity", {}, ""};
  Survey twomode{"spectral.two_mode_norm_oscillation", {}, ""};
  std::size_t dropped = 0;
  std::size_t unmatched = 0;
  std::vector<std::string> used;
  std::mt19937_64 rng(o.seed + 2);
  std::normal_distribution<double> g;
  for (const auto& c : configs) {
    const std::string tag = "q=" + detail::fmt(c.q);
    SchrodingerProblem p;
    p.lattice = GeometricLattice::build(c.lambda0, DeformationParameter(c.q), c.count);
    if (c.oscillator) p.potential = oscillator_potential();
    SpectralDecomposition s;
    try {
      s = solve_stationary(p, 0);
    } catch (const Error& e) {
      report.warn("spectral suite at " + tag + " skipped: " + e.what());
      continue;
    }
    for (const auto& w : s.warnings) report.warn("solve_stationary(" + tag + "): " + w);
    dropped += s.dropped;
    unmatched += s.proximity.unmatched;
    if (s.size() < 2) {
      report.warn("spectral suite at " + tag + " skipped: fewer than two levels retained");
      continue;
    }
    used.push_back(tag + ",count=" + std::to_string(c.count) + (c.oscillator ? ",oscillator" : ",free"));
    gram.add(gram_defect(s));

    double im = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      im = std::max(im, std::abs(s.eigenvalues_q[n].imag()));
      residual.add(s.residuals[n]);
    }
    imag.values.push_back({tag, im});

    // Random normalized superposition of retained levels.
    QPairedState psi = cplx(0.0) * s.state(0);
    for (std::size_t n = 0; n < s.size(); ++n) psi = psi + cplx(g(rng), g(rng)) * s.state(n);
    const cplx nn = q_inner_product(psi, psi).value;
    psi = cplx(1.0 / std::sqrt(nn.real())) * psi;
    round_trip.add(reconstruction_residual(psi, s));
    const ExpansionCoefficients coeffs = expansion_coefficients(psi, s);
    parseval.add(std::abs(coeffs.parseval_sum() - 1.0));
    const HamiltonianPair hp = assemble_hamiltonian(p);
    const cplx direct = expectation_value(hp.h_q, psi);
    spectral_mean.add(std::abs(direct - spectral_expectation(coeffs, s)) / std::max(1.0, std::abs(direct)));
    positivity.values.push_back({tag + ",superposition_imag", nn.imag()});

    const std::vector<double> times{0.0, 0.25, 0.5, 1.0, 2.0};
    for (std::size_t n : {std::size_t{0}, s.size() / 2, s.size() - 1}) {
      const EvolvedState ev = evolve_spectral(s.state(n), s, times);
      for (const cplx& v : ev.norm_trace) norm_const.add(std::abs(v - ev.norm_trace.front()) / std::abs(ev.norm_trace.front()));
      const cplx e = s.eigenvalues_q[n];
      fluct.add(std::abs(fluctuation(hp.h_q, s.state(n))) / std::max(1.0, std::norm(e)));
    }
    {
      const QPairedState two = cplx(1.0 / std::sqrt(2.0)) * (s.state(0) + s.state(1));
      const EvolvedState ev = evolve_spectral(two, s, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
      double amp = 0.0;
      for (const cplx& v : ev.norm_trace) amp = std::max(amp, std::abs(v - ev.norm_trace.front()));
      const cplx cross = q_inner_product(s.state(0), s.state(1)).value;
      twomode_gap.add(std::abs(amp - std::abs(cross)));
      twomode.values.push_back({tag + ",amplitude", amp});
      twomode.values.push_back({tag + ",cross_defect", std::abs(cross)});
    }

    std::vector<QPairedState> basis;
    for (std::size_t n = 0; n < s.size(); ++n) basis.push_back(s.state(n));
    const HermiticityReport hr = hermiticity_report(hp.h_q, hp.h_qinv, basis);
    herm.values.push_back({tag + ",defect", hr.defect});
    herm.values.push_back({tag + ",interior_defect", hr.interior_defect});
    double pr = 0.0;
    for (double v : s.partner_residual) pr = std::max(pr, v);
    partner.values.push_back({tag + ",vs_E", pr});
    partner.values.push_back({tag + ",|1-q^2|", std::abs(1.0 - c.q * c.q)});
    partner.values.push_back({tag + ",gram_condition", s.gram_condition});
    partner.values.push_back({tag + ",proximity_matched", static_cast<double>(s.proximity.matched)});
  }
  herm.note =
      "max |<phi,H psi> - <H phi,psi>| with the literal H_{1/q} over retained levels; the Jackson "
      "derivative's q-adjoint is -(1/q) D_{1/q}, so H_q is not q-Hermitian on the lattice";
  partner.note =
      "max ||H_{1/q} u - conj(E) u|| / (||u|| max(1,|E|)) for the biorthogonal partner u; equals "
      "|1-q^2| when u is an eigenvector of H_{1/q} with eigenvalue q^2 E";
  positivity.note = "imaginary part of <psi,psi>_q for random superpositions before normalization";
  twomode.note = "(phi_0 + phi_1)/sqrt(2): norm_trace oscillation amplitude vs |<phi_0,phi_1>_q|";
  report.surveys.push_back(imag);
  report.surveys.push_back(herm);
  report.surveys.push_back(partner);
  report.surveys.push_back(positivity);
  report.surveys.push_back(twomode);
  report.flags.push_back({"dropped_eigenpairs", std::to_string(dropped)});
  report.flags.push_back({"pairing.proximity_unmatched", std::to_string(unmatched)});
  report.flags.push_back({"pairing.rule",
                          "biorthogonal partner u_n = W^-1 (row n of V^-1)^H; literal H_{1/q} matched by "
                          "eigenvalue proximity for reporting only"});

  std::string cfg;
  for (std::size_t i = 0; i < used.size(); ++i) cfg += (i ? ";" : "") + used[i];
  const std::vector<std::pair<std::string, std::string>> p{{"configs", cfg}, {"quadrature_branch", "q"}};
  return {
      detail::make("spectral.biorthonormal_gram", 6, gram, 1e-8, "max |G - I|", p),
      detail::make("spectral.expansion_round_trip", 6, round_trip, 1e-8, "relative to max|psi|", p),
      detail::make("spectral.parseval", 6, parseval, 1e-8, "absolute |sum |c|^2_q - 1|", p),
      detail::make("spectral.eigenstate_norm_trace", 6, norm_const, 1e-9, "relative", p),
      detail::make("spectral.expectation_spectral_vs_direct", 6, spectral_mean, 1e-8,
                   "relative to max(1,|<H>|)", p),
      detail::make("spectral.eigenstate_fluctuation", 6, fluct, 1e-9, "relative to max(1,|E|^2)", p),
      detail::make("spectral.two_mode_norm_oscillation", 6, twomode_gap, 1e-9,
                   "| norm_trace amplitude - |<phi_0,phi_1>_q| |", p),
      detail::make("spectral.eigen_residual", 6, residual, 1e-8,
                   "||H v - E v||_inf / (||v||_inf max(1,|E|))", p),
  };
}

// ---------------------------------------------------------------------------
// classical limit

/// Window shared by all q in the classical-limit comparisons: points in
/// [x_hi/1.025, x_hi], so a lattice at |q-1| = 1e-4 fits in 256 points.
inline LatticePtr classical_window(double q, double x_hi = 2.0) {
  return detail::span_lattice(q, x_hi, x_hi / 1.025);
}

struct ClassicalDefects {
  double fp_stationary = 0.0;
  double eigenvalues = 0.0;
  double expectation = 0.0;
};

inline ClassicalDefects classical_defects(double qv) {
  const DeformationParameter q(qv);
  ClassicalDefects out;
  const LatticePtr lat = classical_window(qv);

  FPProblem fp = brownian_problem(qv, 1.0);
  fp.lattice = lat;
  const LatticeFunction fq = fp_stationary(fp).density;
  const LatticeFunction gauss = LatticeFunction::sample(lat, [](double x) { return std::exp(-x * x); });
  const double gm = jackson_integral(gauss, lat->lambda0()).value.real();
  for (std::size_t i = 0; i < lat->size(); ++i) {
    out.fp_stationary = std::max(out.fp_stationary, std::abs(fq[i] - gauss[i] / gm) / (gauss[i].real() / gm));
  }

  for (bool osc : {false, true}) {
    SchrodingerProblem sp;
    sp.lattice = lat;
    if (osc) sp.potential = oscillator_potential();
    const auto eq = operator_spectrum(assemble_hamiltonian(sp, Member::q));
    const auto ec = operator_spectrum(undeformed_hamiltonian(sp));
    for (std::size_t n = 0; n < 3 && n < eq.size(); ++n) {
      out.eigenvalues = std::max(out.eigenvalues, std::abs(eq[n] - ec[n]) / std::abs(ec[n]));
    }
  }

  // q-Gaussian pair against the classical Gaussian on the same quadrature.
  QPairedState psi = QPairedState::sample(
      lat, [](double x, const DeformationParameter& d) { return q_exp(-0.5 * x * x, d).value; });
  psi = cplx(1.0 / std::sqrt(q_inner_product(psi, psi).value.real())) * psi;
  QPairedState cl = QPairedState::symmetric(
      LatticeFunction::sample(lat, [](double x) { return std::exp(-0.5 * x * x); }));
  cl = cplx(1.0 / std::sqrt(q_inner_product(cl, cl).value.real())) * cl;
  const OperatorMatrix x = position_matrix(lat);
  const OperatorMatrix x2 = x * x;
  for (const OperatorMatrix* a : {&x, &x2}) {
    const cplx vq = expectation_value(*a, psi);
    const cplx vc = expectation_value(*a, cl);
    out.expectation = std::max(out.expectation, std::abs(vq - vc) / std::abs(vc));
  }
  // Spread about the mean magnifies the deformation effect; compare it too.
  const cplx fq2 = fluctuation(x, psi);
  const cplx fc2 = fluctuation(x, cl);
  out.expectation = std::max(out.expectation, std::abs(fq2 - fc2) / std::abs(fc2));
  return out;
}

inline std::vector<SuiteResult> classical_limit_suites(Report& report) {
  using detail::Max;
  Max fp, eig, ex;
  for (double qv : {1.0 - 1e-4, 1.0 + 1e-4}) {
    const ClassicalDefects d = classical_defects(qv);
    fp.add(d.fp_stationary);
    eig.add(d.eigenvalues);
    ex.add(d.expectation);
  }
  // Convergence order from |q-1| = 1e-2 to 1e-4 on the same window.
  Max slope_dev;
  Survey trend{"classical_limit.defects", {}, "defect per quantity at each q"};
  for (double sign : {-1.0, 1.0}) {
    const ClassicalDefects a = classical_defects(1.0 + sign * 1e-2);
    const ClassicalDefects b = classical_defects(1.0 + sign * 1e-3);
    const ClassicalDefects c = classical_defects(1.0 + sign * 1e-4);
    const std::string tag = sign < 0 ? "q<1" : "q>1";
    auto slope = [](double hi, double lo) { return std::log10(hi / lo) / 2.0; };
    for (auto [name, hi, mid, lo] :
         {std::tuple{"fp_stationary", a.fp_stationary, b.fp_stationary, c.fp_stationary},
          std::tuple{"eigenvalues", a.eigenvalues, b.eigenvalues, c.eigenvalues},
          std::tuple{"expectation", a.expectation, b.expectation, c.expectation}}) {
      const double s = slope(hi, lo);
      slope_dev.add(std::max(0.0, 1.0 - s));
      trend.values.push_back({std::string(name) + "," + tag + ",|q-1|=1e-2", hi});
      trend.values.push_back({std::string(name) + "," + tag + ",|q-1|=1e-3", mid});
      trend.values.push_back({std::string(name) + "," + tag + ",|q-1|=1e-4", lo});
      trend.values.push_back({std::string(name) + "," + tag + ",order", s});
    }
  }
  report.surveys.push_back(trend);
  const std::vector<std::pair<std::string, std::string>> p{
      {"q", "1-1e-4,1+1e-4"}, {"window", "[2/1.025, 2]"}, {"oracle", "undeformed same-grid"}};
  return {
      detail::make("classical_limit.fp_stationary", 7, fp, 1e-2, "max relative pointwise", p),
      detail::make("classical_limit.lowest_three_eigenvalues", 7, eig, 1e-2, "relative", p),
      detail::make("classical_limit.expectation_values", 7, ex, 1e-2,
                   "relative; <x>, <x^2>, (Delta x)^2", p),
      detail::make("classical_limit.convergence_order", 7, slope_dev, 0.2,
                   "shortfall of the fitted order below 1 over |q-1| = 1e-2..1e-4",
                   {{"q", "1 +- 1e-2, 1e-3, 1e-4"}}),
  };
}

// ---------------------------------------------------------------------------

inline Report run_all(const Options& o) {
  Report r;
  r.q = o.q;
  r.lattice_summary =
      "suite-specific positive geometric lattices; run q appended to every parameter grid";
  auto add = [&](std::vector<SuiteResult> v) {
    for (auto& s : v) r.suites.push_back(std::move(s));
  };
  add(combinatorics_suites(o));
  r.suites.push_back(exact_pascal_suite());
  add(exponential_suites(o, r));
  add(jackson_suites(o));
  add(fokker_planck_suites(o, r));
  fokker_planck_stability_survey(r);
  add(free_particle_suites(o, r));
  add(spectral_suites(o, r));
  add(classical_limit_suites(r));

  r.flags.push_back({"convention", std::string(to_string(DilatationConvention::argument_scaling))});
  r.flags.push_back({"convention.computed", "argument_scaling,literal_qx"});
  r.flags.push_back({"quadrature_branch", "q"});
  r.flags.push_back({"quadrature_branch.jackson_integral",
                     "lower sum |x| <= upper for p < 1, upper sum |x| < upper for p > 1"});
  std::sort(r.flags.begin(), r.flags.end());
  return r;
}

}  // namespace qdeform::verify
