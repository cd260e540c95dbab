#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "qsched/analysis.hpp"

using namespace qsched;
using namespace qsched::analysis;

TEST_CASE("singleton batches have no own-batch terms") {
  auto p = BatchModelParams::at_load(0.6, BatchWidthLaw::deterministic(1), Distribution::weibull(0.4));
  for (double x : {0.01, 0.5, 1.0, 4.0, 50.0}) {
    auto t = conditional_terms(p, x);
    CHECK(t.s_f == 0.0);
    CHECK(t.s_b == 0.0);
    CHECK(t.g == doctest::Approx(p.size.pdf(x)).epsilon(1e-14));
  }
}

TEST_CASE("terms vanish at small sizes") {
  auto p = BatchModelParams::at_load(0.8, BatchWidthLaw::geometric_from_1(10.0),
                                     Distribution::exponential(1.0));
  auto t = conditional_terms(p, 1e-12);
  CHECK(t.w_t < 1e-20);
  CHECK(t.rho_x < 1e-10);
  CHECK(conditional_terms(p, 0.0).rho_x == 0.0);
}

TEST_CASE("geometric-from-0 terms match their closed forms") {
  const double beta = 3.0;
  auto size = Distribution::weibull(0.7, 1.3);
  auto p = BatchModelParams::at_load(0.5, BatchWidthLaw::geometric_from_0(beta), size);
  for (int i = 1; i <= 100; ++i) {
    double x = size.quantile(i / 101.0);
    auto t = conditional_terms(p, x);
    double m1 = truncated_moment(size, 1, x);
    double F = size.cdf(x);
    CHECK(t.s_f == doctest::Approx(2.0 * beta * m1).epsilon(1e-10));
    CHECK(t.g == doctest::Approx(beta * size.pdf(x) / std::pow(1.0 + beta - beta * F, 2)).epsilon(1e-10));
    CHECK(t.s_b == doctest::Approx(2.0 * beta * m1 / (1.0 + beta - beta * F)).epsilon(1e-10));
    double m2 = truncated_moment(size, 2, x);
    double expected_w = p.lambda * (2.0 * beta * beta * m1 * m1 + beta * m2) / (2.0 * (1.0 - t.rho_x));
    CHECK(t.w_t == doctest::Approx(expected_w).epsilon(1e-10));
  }
}

TEST_CASE("conditional response grows with size") {
  auto p = BatchModelParams::at_load(0.7, BatchWidthLaw::geometric_from_1(100.0),
                                     Distribution::weibull(3.5));
  double prev = -1.0;
  for (int i = 1; i <= 200; ++i) {
    double x = p.size.quantile(i / 201.0);
    auto t = conditional_terms(p, x);
    double r = conditional_response(t, t.s_f, x);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("light traffic reduces to the mean size") {
  auto size = Distribution::weibull(0.4, 2.0);
  auto p = BatchModelParams::at_load(1e-9, BatchWidthLaw::deterministic(1), size);
  auto fct = psjf_mean_fct(p);
  CHECK(fct.converged);
  CHECK(fct.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("exponential singletons match the classical value") {
  // Classical preemptive SJF response integrated separately at rho = 0.5.
  auto p = BatchModelParams::at_load(0.5, BatchWidthLaw::deterministic(1), Distribution::exponential(1.0));
  auto fct = psjf_mean_fct(p);
  CHECK(fct.converged);
  CHECK(fct.value == doctest::Approx(1.53138328329633).epsilon(1e-8));
  CHECK(psjf_mean_bct(p).value == doctest::Approx(fct.value).epsilon(1e-9));
}

TEST_CASE("geometric batches, exponential sizes, frozen values") {
  auto p = BatchModelParams::at_load(0.5, BatchWidthLaw::geometric_from_1(5.0), Distribution::exponential(1.0));
  auto fct = psjf_mean_fct(p);
  auto bct = psjf_mean_bct(p);
  CHECK(fct.converged);
  CHECK(bct.converged);
  CHECK(fct.value == doctest::Approx(4.93436459431861).epsilon(1e-8));
  CHECK(bct.value == doctest::Approx(10.3350749034719).epsilon(1e-8));
}

// With a fixed width every batch weighs the same in both means, so the mean
// BCT bounds the mean FCT. Random widths size-bias the flow average.
TEST_CASE("fixed-width batch completion is at least flow completion") {
  for (double shape : {0.4, 1.0, 3.5}) {
    for (double rho : {0.2, 0.5, 0.8}) {
      for (const auto& w : {BatchWidthLaw::deterministic(2), BatchWidthLaw::deterministic(4),
                            BatchWidthLaw::deterministic(10)}) {
        auto p = BatchModelParams::at_load(rho, w, Distribution::weibull(shape));
        CHECK(psjf_mean_bct(p).value >= psjf_mean_fct(p).value);
      }
    }
  }
}

TEST_CASE("batch completion grows with load") {
  auto w = BatchWidthLaw::geometric_from_1(100.0);
  auto size = Distribution::weibull(0.4);
  double prev = 0.0;
  for (double rho = 0.05; rho < 0.951; rho += 0.05) {
    auto bct = psjf_mean_bct(BatchModelParams::at_load(rho, w, size));
    CHECK(bct.converged);
    CHECK(std::isfinite(bct.value));
    CHECK(bct.value > prev);
    prev = bct.value;
  }
}

TEST_CASE("batch length density integrates to one") {
  for (const auto& w : {BatchWidthLaw::geometric_from_1(100.0), BatchWidthLaw::two_point(3, 130, 2.0 / 127.0),
                        BatchWidthLaw::deterministic(1)}) {
    for (const auto& d : {Distribution::exponential(1.0), Distribution::weibull(3.5), Distribution::weibull(0.4)}) {
      CHECK(batch_length_mass(w, d).value == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  for (double beta : {0.5, 3.0, 20.0}) {
    CHECK(batch_length_mass(BatchWidthLaw::geometric_from_0(beta), Distribution::weibull(0.4)).value ==
          doctest::Approx(beta / (1.0 + beta)).epsilon(1e-6));
  }
}

TEST_CASE("invalid models are rejected") {
  auto p = BatchModelParams::at_load(0.5, BatchWidthLaw::deterministic(1), Distribution::exponential(1.0));
  p.lambda = 1.5;
  CHECK_THROWS_AS(psjf_mean_fct(p), std::invalid_argument);
  auto q = BatchModelParams::at_load(0.5, BatchWidthLaw::deterministic(1), Distribution::exponential(1.0));
  q.size = Distribution::deterministic(1.0);
  CHECK_THROWS_AS(psjf_mean_bct(q), std::invalid_argument);
  CHECK_THROWS_AS(BatchModelParams::at_load(1.0, BatchWidthLaw::deterministic(1), Distribution::exponential(1.0)),
                  std::invalid_argument);
}

TEST_CASE("processor sharing formula") {
  CHECK(ps_open_mean_fct(0.0) == 1.0);
  CHECK(ps_open_mean_fct(0.5) == doctest::Approx(2.0));
  CHECK(ps_open_mean_fct(0.9) == doctest::Approx(10.0));
  CHECK_THROWS_AS(ps_open_mean_fct(1.0), std::invalid_argument);
}

TEST_CASE("geometric occupancy percentile") {
  CHECK(active_count_percentile(0.9, 99.9) == doctest::Approx(65.5625).epsilon(1e-4));
  CHECK(active_count_percentile(0.5, 99.9) == doctest::Approx(9.9658).epsilon(1e-4));
  CHECK(active_count_percentile(0.5, 1e-12) == doctest::Approx(0.0));
  // -3 / log10(rho) is the same curve at p = 99.9
  CHECK(active_count_percentile(0.7, 99.9) == doctest::Approx(-3.0 / std::log10(0.7)).epsilon(1e-12));
}

TEST_CASE("closed PS mean value analysis") {
  // One client: utilization is the busy fraction of a renewal cycle.
  ClosedClass one{1, 2.0, 3.0};
  auto r = closed_ps_mva(std::span(&one, 1));
  CHECK(r.utilization == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
  CHECK(r.response[0] == doctest::Approx(2.0).epsilon(1e-14));

  // Two-class population against brute force: the single-class recursion
  // applied to a merged class must agree when the classes are identical.
  std::vector<ClosedClass> split = {{30, 1.0, 4.0}, {20, 1.0, 4.0}};
  ClosedClass merged{50, 1.0, 4.0};
  auto a = closed_ps_mva(split);
  auto b = closed_ps_mva(std::span(&merged, 1));
  CHECK(a.utilization == doctest::Approx(b.utilization).epsilon(1e-12));
  CHECK(a.response[0] == doctest::Approx(b.response[0]).epsilon(1e-12));
  CHECK(a.response[1] == doctest::Approx(b.response[0]).epsilon(1e-12));

  std::vector<ClosedClass> two = {{50, 1.0, 1.0}, {50, 2.0, 2.0}};
  double ratio = closed_think_ratio_for_utilization(two, 0.9);
  for (auto& c : two) c.mean_think = ratio * c.mean_size;
  CHECK(closed_ps_mva(two).utilization == doctest::Approx(0.9).epsilon(1e-10));
}
