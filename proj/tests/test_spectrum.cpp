#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "enclosure/corner_spectrum.hpp"

using namespace enclosure;

namespace {

// Independent root finder: the residual factors as
//   (sin(pi mu) - q sin(w mu)) (sin(pi mu) + q sin(w mu)),  w = pi - Theta,
// and each factor has simple roots located by sign changes and TOMS 748.
std::vector<double> oracle_roots(double k, double theta, double mu_max) {
  const double q = (1.0 - k) / (1.0 + k), w = pi - theta;
  std::vector<double> roots;
  for (double sign : {-1.0, 1.0}) {
    auto f = [&](double mu) { return std::sin(pi * mu) + sign * q * std::sin(w * mu); };
    const int n = 40000;
    for (int i = 1; i < n; ++i) {
      const double a = mu_max * i / n, b = mu_max * (i + 1) / n;
      const double fa = f(a), fb = f(b);
      if (fa == 0.0) {
        roots.push_back(a);
      } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
        boost::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> uniq;
  for (double r : roots)
    if (uniq.empty() || r - uniq.back() > 1e-8) uniq.push_back(r);
  return uniq;
}

}  // namespace

TEST(CornerExponents, RightAngleClosedForm) {
  const auto mus = corner_exponents({2.0, 1.5 * pi}, 5.0);
  ASSERT_GE(mus.size(), 2u);
  // sin^2(pi mu) = sin^2(pi mu / 2) / 9 gives cos(pi mu / 2) = +-1/6.
  EXPECT_NEAR(mus[0], 2.0 / pi * std::acos(1.0 / 6.0), 1e-10);
  EXPECT_NEAR(mus[1], 2.0 / pi * std::acos(-1.0 / 6.0), 1e-10);
  EXPECT_NEAR(mus[0], 0.893399241924, 1e-11);
  EXPECT_NEAR(mus[1], 1.106600758076, 1e-11);
  EXPECT_NEAR(mus[0] + mus[1], 2.0, 1e-10);
}

TEST(CornerExponents, MatchIndependentOracle) {
  for (double k : {0.2, 2.0, 5.0, 40.0})
    for (double theta_deg : {200.0, 240.0, 270.0, 300.0, 345.0}) {
      const double theta = theta_deg * pi / 180.0;
      const auto got = corner_exponents({k, theta}, 5.0);
      const auto want = oracle_roots(k, theta, 5.0);
      ASSERT_EQ(got.size(), want.size()) << "k " << k << " theta " << theta_deg;
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9) << "k " << k << " theta " << theta_deg;
    }
}

TEST(CornerExponents, InvariantUnderReciprocalContrast) {
  for (double k : {0.3, 3.0, 17.0}) {
    const auto a = corner_exponents({k, 4.3}, 6.0), b = corner_exponents({1.0 / k, 4.3}, 6.0);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  }
}

TEST(CornerExponents, ResidualsVanishAndOrdering) {
  const CornerParams cp(3.0, 4.0);
  const auto mus = corner_exponents(cp, 8.0);
  ASSERT_FALSE(mus.empty());
  for (std::size_t i = 0; i < mus.size(); ++i) {
    EXPECT_LT(std::abs(corner_residual(cp, mus[i])), 1e-11);
    if (i > 0) EXPECT_GT(mus[i], mus[i - 1]);
  }
}

TEST(CornerExponents, WeakContrastTendsToIntegers) {
  // As k -> 1 the residual tends to sin^2(pi mu), whose roots are integers.
  const auto mus = corner_exponents({1.0001, 1.5 * pi}, 3.5);
  ASSERT_GE(mus.size(), 3u);
  EXPECT_NEAR(mus[0], 1.0, 1e-3);
}

TEST(CornerExponents, RejectsBadParameters) {
  for (auto [k, th] : {std::pair{1.0, 4.0}, {-2.0, 4.0}, {2.0, 3.0}, {2.0, 2 * pi}}) {
    try {
      CornerParams cp(k, th);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::config);
    }
  }
  EXPECT_THROW(corner_exponents({2.0, 4.0}, 11.0), Error);
}

TEST(CornerSystem, DeterminantVanishesOnlyAtExponents) {
  const CornerParams cp(2.0, 1.5 * pi);
  for (double mu : corner_exponents(cp, 5.0)) {
    const auto sys = corner_system_det(cp, mu);
    EXPECT_LT(std::abs(sys.det), 1e-9) << mu;
    ASSERT_TRUE(sys.nullvec.has_value());
    EXPECT_LT(std::abs(sys.compatibility), 1e-8);
  }
  for (double mu : {0.5, 1.5, 2.5}) {
    const auto sys = corner_system_det(cp, mu);
    EXPECT_GT(std::abs(sys.det), 1.0);
    EXPECT_FALSE(sys.nullvec.has_value());
  }
}

TEST(DecayFit, RecoversPowerLaw) {
  IndicatorSeries s{Direction(0.0), 0.0, {}};
  for (int i = 0; i < 30; ++i) {
    const double tau = 5.0 + i;
    s.samples.push_back({tau, complex(3.0 * std::pow(tau, -0.9), 0.0), 1e-20});
  }
  const auto fit = fit_decay_exponent(s, 0.0);
  EXPECT_NEAR(fit.mu_hat, 0.9, 1e-12);
  EXPECT_NEAR(fit.L_hat, 3.0, 1e-11);
  EXPECT_EQ(fit.samples, 28u);
  EXPECT_DOUBLE_EQ(fit.tau_min, 7.0);

  // Same series recorded at another shift.
  IndicatorSeries shifted{Direction(0.0), -0.4, {}};
  for (const auto& x : s.samples) shifted.samples.push_back({x.tau, x.value * std::exp(x.tau * 0.4), 1e-20});
  EXPECT_NEAR(fit_decay_exponent(shifted, 0.0).mu_hat, 0.9, 1e-10);
}

TEST(DecayFit, TooFewSamples) {
  IndicatorSeries s{Direction(0.0), 0.0, {}};
  for (int i = 0; i < 9; ++i) s.samples.push_back({1.0 + i, complex(1.0, 0.0), 1e-20});
  try {
    fit_decay_exponent(s, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::window);
  }
}
