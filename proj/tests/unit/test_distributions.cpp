#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "qsched/distributions.hpp"

using namespace qsched;

namespace {

struct SampleStats {
  double mean;
  double cv2;
};

SampleStats sample_stats(const Distribution& d, int n, std::uint64_t seed) {
  Rng rng(seed);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = d.sample(rng);
    s += x;
    s2 += x * x;
  }
  double m = s / n;
  return {m, (s2 / n - m * m) / (m * m)};
}

// Truncated moment computed directly in the size domain, as an oracle.
double direct_truncated_moment(const Distribution& d, int order, double x) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double t) { return std::pow(t, order) * d.pdf(t); }, 0.0, x);
}

}  // namespace

TEST_CASE("deterministic law samples its value") {
  auto d = Distribution::deterministic(1.0);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(d.sample(rng) == 1.0);
  CHECK(d.atomic());
  CHECK(d.mean() == 1.0);
  CHECK(d.cv2() == 0.0);
}

TEST_CASE("exponential sample mean") {
  auto s = sample_stats(Distribution::exponential(1.0), 1'000'000, 11);
  CHECK(s.mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("weibull shape 0.4 sample cv2") {
  auto d = Distribution::weibull(0.4, 1.0);
  // Gamma(1 + 2/k) / Gamma(1 + 1/k)^2 - 1 at k = 0.4
  const double exact = 9.86497744840672;
  CHECK(d.cv2() == doctest::Approx(exact).epsilon(1e-12));
  auto s = sample_stats(d, 10'000'000, 5);
  CHECK(s.mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s.cv2 >= 8.5);
  CHECK(s.cv2 <= 11.5);
}

TEST_CASE("weibull shape 3.5 moments") {
  auto d = Distribution::weibull(3.5, 1.0);
  CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.cv2() == doctest::Approx(0.100146073785273).epsilon(1e-12));
  CHECK(d.raw_moment(2) == doctest::Approx(1.10014607378527).epsilon(1e-12));
}

TEST_CASE("weibull_from_cv2 inverts the cv2 map") {
  for (double cv2 : {0.05, 0.1, 1.0, 3.0, 10.0, 50.0}) {
    auto d = Distribution::weibull_from_cv2(cv2, 2.0);
    CHECK(d.cv2() == doctest::Approx(cv2).epsilon(1e-10));
    CHECK(d.mean() == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK(Distribution::weibull_from_cv2(1.0).shape() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(Distribution::weibull_from_cv2(0.0), std::invalid_argument);
}

TEST_CASE("cdf, survival and quantile agree") {
  for (const auto& d : {Distribution::exponential(2.0), Distribution::weibull(0.4),
                        Distribution::weibull(3.5, 3.0)}) {
    for (double p : {1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
      double x = d.quantile(p);
      CHECK(d.cdf(x) == doctest::Approx(p).epsilon(1e-12));
      CHECK(d.cdf(x) + d.survival(x) == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(d.size_at_hazard(d.cumulative_hazard(x)) == doctest::Approx(x).epsilon(1e-12));
    }
  }
}

TEST_CASE("truncated moment examples") {
  auto e = Distribution::exponential(1.0);
  CHECK(truncated_moment(e, 1, 0.0) == 0.0);
  CHECK(truncated_moment(e, 1, 1.0) == doctest::Approx(0.264241117657115).epsilon(1e-12));
  CHECK(truncated_moment(e, 1, 1e6) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(truncated_moment(e, 2, 1e6) == doctest::Approx(2.0).epsilon(1e-14));

  auto w = Distribution::weibull(3.5, 1.0);
  double median = w.quantile(0.5);
  CHECK(median == doctest::Approx(1.00092391936041).epsilon(1e-12));
  double m2 = truncated_moment(w, 2, median);
  CHECK(m2 > 0.0);
  CHECK(m2 < w.raw_moment(2));
  CHECK(m2 == doctest::Approx(0.294069969655907).epsilon(1e-10));
  CHECK(truncated_moment(w, 1, median) == doctest::Approx(0.372088205915355).epsilon(1e-10));
}

TEST_CASE("truncated moment against Monte Carlo") {
  auto w = Distribution::weibull(3.5, 1.0);
  double median = w.quantile(0.5);
  Rng rng(17);
  const int n = 10'000'000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = w.sample(rng);
    if (x <= median) acc += x * x;
  }
  CHECK(acc / n == doctest::Approx(truncated_moment(w, 2, median)).epsilon(0.005));
}

TEST_CASE("truncated moment against direct quadrature") {
  for (const auto& d : {Distribution::exponential(1.0), Distribution::weibull(0.4),
                        Distribution::weibull(3.5), Distribution::weibull(1.7, 2.5)}) {
    for (int order : {1, 2}) {
      for (double p : {0.001, 0.1, 0.5, 0.9, 0.999}) {
        double x = d.quantile(p);
        CHECK(truncated_moment(d, order, x) ==
              doctest::Approx(direct_truncated_moment(d, order, x)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("truncated moment is monotone and reaches the raw moment") {
  for (const auto& d : {Distribution::exponential(1.0), Distribution::weibull(0.4),
                        Distribution::weibull(3.5)}) {
    for (int order : {1, 2}) {
      double prev = 0.0;
      for (int i = 1; i <= 200; ++i) {
        double x = d.quantile(i / 201.0);
        double m = truncated_moment(d, order, x);
        CHECK(m >= prev);
        prev = m;
      }
      CHECK(truncated_moment(d, order, d.quantile(1.0 - 1e-15)) ==
            doctest::Approx(d.raw_moment(order)).epsilon(1e-6));
    }
  }
}

TEST_CASE("truncated moment errors") {
  CHECK_THROWS_AS(truncated_moment(Distribution::deterministic(1.0), 1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(truncated_moment(Distribution::exponential(1.0), 1, -0.5),
                  std::invalid_argument);
}

TEST_CASE("batch expectation examples") {
  const double beta = 4.0;
  auto g0 = BatchWidthLaw::geometric_from_0(beta);
  for (double u : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    double expected = beta / std::pow(1.0 + beta - beta * u, 2);
    CHECK(batch_expectation(g0, BatchWeight::b_u_pow_b_minus_1, u) ==
          doctest::Approx(expected).epsilon(1e-13));
    CHECK(batch_expectation_series(g0, BatchWeight::b_u_pow_b_minus_1, u) ==
          doctest::Approx(expected).epsilon(1e-11));
  }

  auto g1 = BatchWidthLaw::geometric_from_1(100.0);
  CHECK(batch_expectation_series(g1, BatchWeight::b_u_pow_b_minus_1, 0.5) ==
        doctest::Approx(0.0392118419762768).epsilon(1e-11));
  CHECK(batch_expectation(g1, BatchWeight::b_u_pow_b_minus_1, 0.5) ==
        doctest::Approx(0.0392118419762768).epsilon(1e-13));

  for (const auto& law : {BatchWidthLaw::deterministic(7), g0, g1,
                          BatchWidthLaw::two_point(3, 130, 2.0 / 127.0),
                          BatchWidthLaw::hyper_geometric(5.0, 10.0)}) {
    CHECK(batch_expectation(law, BatchWeight::b_u_pow_b_minus_1, 1.0) ==
          doctest::Approx(law.mean()).epsilon(1e-12));
    CHECK(batch_expectation(law, BatchWeight::b, 1.0) == doctest::Approx(law.mean()).epsilon(1e-12));
    CHECK(batch_expectation(law, BatchWeight::b_squared, 1.0) ==
          doctest::Approx(law.second_moment()).epsilon(1e-12));
    CHECK(batch_expectation(law, BatchWeight::b_b_minus_1, 1.0) ==
          doctest::Approx(law.second_moment() - law.mean()).epsilon(1e-12));
  }
}

TEST_CASE("closed forms agree with the series") {
  const BatchWeight weights[] = {BatchWeight::b_u_pow_b_minus_1, BatchWeight::bb1_u_pow_b_minus_2,
                                 BatchWeight::b, BatchWeight::b_squared, BatchWeight::b_b_minus_1};
  for (const auto& law : {BatchWidthLaw::geometric_from_1(1.0), BatchWidthLaw::geometric_from_1(3.0),
                          BatchWidthLaw::geometric_from_1(100.0), BatchWidthLaw::geometric_from_0(2.5),
                          BatchWidthLaw::hyper_geometric(5.0, 10.0),
                          BatchWidthLaw::hyper_geometric(20.0, 2.0)}) {
    for (auto w : weights) {
      for (double u : {0.0, 0.1, 0.5, 0.8, 0.99, 1.0}) {
        double closed = batch_expectation(law, w, u);
        double series = batch_expectation_series(law, w, u);
        CHECK(closed == doctest::Approx(series).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("hyper-geometric burst law has the requested moments") {
  auto law = BatchWidthLaw::hyper_geometric(5.0, 10.0);
  CHECK(law.mean() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(law.cv2() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(law.min_width() == 1);
  CHECK(law.max_width() == -1);
  double total = 0.0;
  for (long b = 0; b < 5000; ++b) total += law.pmf(b);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(23);
  const int n = 2'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double b = static_cast<double>(law.sample(rng));
    s += b;
    s2 += b * b;
  }
  double m = s / n;
  CHECK(m == doctest::Approx(5.0).epsilon(0.02));
  CHECK((s2 / n - m * m) / (m * m) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("two-point law") {
  auto law = BatchWidthLaw::two_point(3, 130, 2.0 / 127.0);
  CHECK(law.mean() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(law.cv2() == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(law.min_width() == 3);
  CHECK(law.max_width() == 130);
  CHECK_THROWS_AS(BatchWidthLaw::two_point(0, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(BatchWidthLaw::two_point(2, 4, 1.5), std::invalid_argument);
}

TEST_CASE("from_moments picks deterministic for zero variance") {
  CHECK(BatchWidthLaw::from_moments(5.0, 0.0).kind() == BatchWidthLaw::Kind::deterministic);
  CHECK(BatchWidthLaw::from_moments(5.0, 0.0).mean() == 5.0);
  CHECK(BatchWidthLaw::from_moments(5.0, 10.0).kind() == BatchWidthLaw::Kind::hyper_geometric);
}

TEST_CASE("geometric laws") {
  auto g1 = BatchWidthLaw::geometric_from_1(100.0);
  CHECK(g1.mean() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(g1.cv2() == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(g1.prob_nonempty() == 1.0);
  auto g0 = BatchWidthLaw::geometric_from_0(3.0);
  CHECK(g0.mean() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(g0.pmf(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g0.emitted_mean() == doctest::Approx(4.0).epsilon(1e-12));
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) CHECK(g0.sample(rng) >= 1);
}
