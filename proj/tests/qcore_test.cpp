#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdeform/exact.hpp"
#include "qdeform/qcore.hpp"

namespace {

using qdeform::cplx;
using qdeform::DeformationParameter;
using qdeform::DomainFlag;
namespace exact = qdeform::exact;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Independent q-Pascal recursion, the oracle for the coefficient tables.
exact::Rational pascal(long n, long r, const exact::Rational& q) {
  if (r < 0 || r > n) return 0;
  if (r == 0 || r == n) return 1;
  return pascal(n - 1, r - 1, q) + exact::pow(q, r) * pascal(n - 1, r, q);
}

TEST(DeformationParameter, RejectsNonPositive) {
  EXPECT_THROW(DeformationParameter(0.0), qdeform::InvalidArgument);
  EXPECT_THROW(DeformationParameter(-1.0), qdeform::InvalidArgument);
  EXPECT_THROW(DeformationParameter(NAN), qdeform::InvalidArgument);
}

TEST(DeformationParameter, InverseIsExactInvolution) {
  for (double q : {0.3, 0.9, 1.1, 1.7, 3.0, 0.123456789}) {
    const DeformationParameter p(q, 1e-6);
    EXPECT_EQ(p.inverse().inverse().q(), p.q());
    EXPECT_EQ(p.inverse().epsilon_one(), 1e-6);
    EXPECT_EQ(p.inverse().q(), 1.0 / q);
  }
}

TEST(BasicNumber, Examples) {
  EXPECT_EQ(qdeform::basic_number(0, DeformationParameter(0.7)), 0.0);
  EXPECT_EQ(qdeform::basic_number(0, DeformationParameter(1.0)), 0.0);
  EXPECT_EQ(qdeform::basic_number(5, DeformationParameter(1.0)), 5.0);
  EXPECT_NEAR(qdeform::basic_number(3, DeformationParameter(2.0)), 7.0, 1e-14);
}

TEST(BasicNumber, RecurrenceAndInverseScaling) {
  for (double q : {0.5, 0.9, 1.1, 2.0}) {
    const DeformationParameter p(q);
    for (long n = 1; n <= 40; ++n) {
      const double bn = qdeform::basic_number(n, p);
      EXPECT_LT(rel(qdeform::basic_number(n + 1, p), 1.0 + q * bn), 1e-12) << q << " " << n;
      EXPECT_LT(rel(qdeform::basic_number(n, p.inverse()), std::pow(q, 1.0 - n) * bn), 1e-11);
    }
  }
}

TEST(BasicNumber, ContinuousAcrossClassicalSwitch) {
  for (long n : {2L, 7L, 30L}) {
    const double below = qdeform::basic_number(n, DeformationParameter(1.0 + 0.999e-8));
    const double above = qdeform::basic_number(n, DeformationParameter(1.0 + 1.001e-8));
    EXPECT_LT(rel(below, above), 1e-9) << n;
  }
}

TEST(BasicFactorial, Examples) {
  EXPECT_EQ(qdeform::basic_factorial(0, DeformationParameter(3.0)), 1.0);
  EXPECT_NEAR(qdeform::basic_factorial(3, DeformationParameter(2.0)), 21.0, 1e-12);
  EXPECT_NEAR(qdeform::basic_factorial(4, DeformationParameter(2.0)), 315.0, 1e-11);
}

TEST(BasicFactorial, OverflowNamesFirstFailingIndex) {
  try {
    qdeform::basic_factorial(200, DeformationParameter(2.0));
    FAIL() << "expected RangeError";
  } catch (const qdeform::RangeError& e) {
    // prod_{k<=K} 2^k ~ 2^{K(K+1)/2} passes 2^1024 at K = 45.
    EXPECT_EQ(e.index(), 45);
    EXPECT_NE(std::string(e.what()).find("k = 45"), std::string::npos);
  }
}

TEST(QBinomial, Examples) {
  const DeformationParameter two(2.0);
  EXPECT_EQ(qdeform::q_binomial(7, 0, two), 1.0);
  EXPECT_NEAR(qdeform::q_binomial(4, 2, DeformationParameter(1.0)), 6.0, 1e-15);
  EXPECT_NEAR(qdeform::q_binomial(4, 2, two), 35.0, 1e-12);
  EXPECT_EQ(qdeform::q_binomial(4, 5, two), 0.0);
  EXPECT_EQ(qdeform::q_binomial(4, -1, two), 0.0);
  EXPECT_EQ(qdeform::q_binomial(-3, 1, two), 0.0);
}

TEST(QBinomial, MatchesExactPascalOracle) {
  for (auto [num, den] : {std::pair{1, 2}, std::pair{4, 5}, std::pair{5, 4}, std::pair{2, 1}}) {
    const exact::Rational qr(num, den);
    const DeformationParameter p(static_cast<double>(num) / den);
    for (long n = 0; n <= 14; ++n) {
      for (long r = 0; r <= n; ++r) {
        const exact::Rational oracle = pascal(n, r, qr);
        EXPECT_EQ(exact::q_binomial(n, r, qr), oracle);
        EXPECT_LT(rel(qdeform::q_binomial(n, r, p), oracle.convert_to<double>()), 1e-12);
      }
    }
  }
}

TEST(QBinomial, SymmetryProperty) {
  for (double q : {0.3, 0.8, 1.0, 1.25, 2.0}) {
    const DeformationParameter p(q);
    for (long n = 0; n <= 20; ++n) {
      for (long r = 0; r <= n; ++r) {
        EXPECT_LT(rel(qdeform::q_binomial(n, r, p), qdeform::q_binomial(n, n - r, p)), 1e-13);
      }
    }
  }
}

TEST(BasicBinomial, Examples) {
  const DeformationParameter two(2.0);
  EXPECT_EQ(qdeform::basic_binomial_power(3.0, 4.0, 0, two), 1.0);
  EXPECT_EQ(qdeform::basic_binomial_power(1.0, 1.0, 2, two), 6.0);
  for (long k = 1; k <= 6; ++k) {
    EXPECT_EQ(qdeform::basic_binomial_power(0.37, -0.37, k, DeformationParameter(0.6)), 0.0);
  }
}

TEST(BasicBinomial, SumFormEqualsProductFormOnRandomDraws) {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> xy(-2.0, 2.0);
  std::uniform_real_distribution<double> qd(0.3, 2.5);
  std::uniform_int_distribution<long> nd(0, 10);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    // Positive x, y keep the product well away from zero so the
    // relative comparison is meaningful.
    const double x = std::abs(xy(rng)) + 0.1;
    const double y = std::abs(xy(rng)) + 0.1;
    const long n = nd(rng);
    const DeformationParameter p(qd(rng));
    worst = std::max(worst, rel(qdeform::basic_binomial_sum(x, y, n, p),
                                qdeform::basic_binomial_power(x, y, n, p)));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(QExp, Examples) {
  for (double q : {0.5, 1.0, 2.0}) {
    const auto e = qdeform::q_exp(0.0, DeformationParameter(q));
    EXPECT_EQ(e.value, cplx(1.0));
    EXPECT_GE(e.terms_used, 1);
    EXPECT_EQ(e.domain_flag, DomainFlag::inside);
  }
  // 60-term mpmath partial sum of 1/[k]_2!.
  EXPECT_NEAR(qdeform::q_exp(1.0, DeformationParameter(2.0)).value.real(), 2.384231029031372,
              1e-14);
  EXPECT_NEAR(qdeform::q_exp(0.5, DeformationParameter(0.8)).value.real(), 1.672998480146787,
              1e-14);
}

TEST(QExp, ClassicalLimit) {
  for (double q : {1.0 - 1e-6, 1.0 + 1e-6, 1.0}) {
    for (double x = -5.0; x <= 5.0; x += 0.25) {
      const double ex = std::exp(x);
      EXPECT_LE(std::abs(qdeform::q_exp(x, DeformationParameter(q)).value.real() - ex), 1e-4 * ex)
          << q << " " << x;
    }
  }
}

TEST(QExp, DomainRoutes) {
  const DeformationParameter half(0.5);
  EXPECT_EQ(qdeform::q_exp(-0.5, half).domain_flag, DomainFlag::inside);
  EXPECT_EQ(qdeform::q_exp(-3.0, half).domain_flag, DomainFlag::via_reciprocal);
  EXPECT_THROW(qdeform::q_exp(2.5, half), qdeform::DomainError);
  EXPECT_THROW(qdeform::q_exp(cplx(0.0, 2.0), half), qdeform::DomainError);
  EXPECT_EQ(qdeform::classify_q_exp(cplx(0.0, 2.0), half), DomainFlag::divergent);
  // q > 1: reciprocal only while the 1/q series converges (|z| < q/(q-1) = 5).
  const DeformationParameter q125(1.25);
  EXPECT_EQ(qdeform::q_exp(-4.0, q125).domain_flag, DomainFlag::via_reciprocal);
  EXPECT_EQ(qdeform::q_exp(-6.0, q125).domain_flag, DomainFlag::inside);
  qdeform::SeriesOptions direct;
  direct.allow_reciprocal = false;
  EXPECT_EQ(qdeform::q_exp(-0.9, half, direct).domain_flag, DomainFlag::inside);
  EXPECT_THROW(qdeform::q_exp(-2.0, half, direct), qdeform::DomainError);
}

TEST(QExp, InverseIdentityExamples) {
  EXPECT_EQ(qdeform::q_exp_inverse_defect(0.0, DeformationParameter(1.7)), 0.0);
  EXPECT_LE(qdeform::q_exp_inverse_defect(1.5, DeformationParameter(2.0)), 1e-10);
  EXPECT_LE(qdeform::q_exp_inverse_defect(0.3, DeformationParameter(0.5)), 1e-10);
}

TEST(QExp, InverseIdentityByDirectSummation) {
  // Both factors summed as plain series, so the identity is not built in.
  qdeform::SeriesOptions direct;
  direct.allow_reciprocal = false;
  for (double q : {0.5, 0.8, 1.25, 2.0}) {
    const DeformationParameter p(q);
    const double r = std::min(qdeform::q_exp_radius(p), qdeform::q_exp_radius(p.inverse()));
    for (double x = -0.9 * std::min(r, 3.0); x <= 0.9 * std::min(r, 3.0); x += 0.1) {
      const cplx a = qdeform::q_exp(x, p, direct).value;
      const cplx b = qdeform::q_exp(-x, p.inverse(), direct).value;
      EXPECT_LE(std::abs(a * b - 1.0), 1e-10) << q << " " << x;
    }
  }
}

TEST(QExp, MonotoneAndConvexOnReals) {
  for (double q : {0.5, 0.9, 1.2, 2.0}) {
    const DeformationParameter p(q);
    const double hi = std::min(3.0, 0.95 * qdeform::q_exp_radius(p));
    // For q > 1, E_q(x) = prod_k (1 + (1 - 1/q) q^{-k} x) has its first real
    // zero at x = -q/(q-1); stay to the right of it.
    const double lo = q < 1.0 ? -4.0 : std::max(-4.0, -0.95 * q / (q - 1.0));
    std::vector<double> v;
    const double h = 0.05;
    for (double x = lo; x <= hi; x += h) v.push_back(qdeform::q_exp(x, p).value.real());
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GT(v[i], v[i - 1]) << q;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      EXPECT_GT(v[i + 1] - 2 * v[i] + v[i - 1], -1e-13) << q << " " << i;
    }
  }
}

TEST(QExp, AdditionLawViaBasicBinomialSeries) {
  // E_q(x + y) read as sum_k (x+y)^(k)/[k]! equals E_q(x) E_{1/q}(y).
  for (double q : {0.8, 1.25}) {
    const DeformationParameter p(q);
    for (double x = -1.0; x <= 1.0; x += 0.25) {
      for (double y = -1.0; y <= 1.0; y += 0.25) {
        double series = 0.0;
        for (long k = 0; k < 200; ++k) {
          const double t = qdeform::basic_binomial_power(x, y, k, p) /
                           qdeform::basic_factorial(k, p);
          series += t;
          if (k > 5 && std::abs(t) < 1e-18) break;
        }
        const double rhs =
            (qdeform::q_exp(x, p).value * qdeform::q_exp(y, p.inverse()).value).real();
        EXPECT_LT(rel(series, rhs), 1e-9) << q << " " << x << " " << y;
      }
    }
  }
}

TEST(QPlaneWave, Examples) {
  const DeformationParameter p(1.3);
  EXPECT_EQ(qdeform::q_plane_wave(2.0, 0.0, p, 0.7), cplx(0.7));
  const cplx classical = qdeform::q_plane_wave(1.5, 0.8, DeformationParameter(1.0), 1.0);
  EXPECT_LT(std::abs(classical - std::exp(cplx(0.0, 1.2))), 1e-13);
  for (double x : {0.1, 0.5, 1.0, 2.0}) {
    const double n = 1.7;
    const cplx pair = std::conj(qdeform::q_plane_wave(1.0, x, p.inverse(), n)) *
                      qdeform::q_plane_wave(1.0, x, p, n);
    EXPECT_LT(std::abs(pair - n * n), 1e-12) << x;
  }
}

}  // namespace
