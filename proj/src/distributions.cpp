#include "qsched/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

namespace qsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weibull_cv2(double shape) {
  return std::exp(std::lgamma(1.0 + 2.0 / shape) -
                  2.0 * std::lgamma(1.0 + 1.0 / shape)) -
         1.0;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

Distribution Distribution::deterministic(double value) {
  require_positive(value, "deterministic value");
  return Distribution(Kind::deterministic, value, 1.0);
}

Distribution Distribution::exponential(double mean) {
  require_positive(mean, "exponential mean");
  return Distribution(Kind::exponential, mean, 1.0);
}

Distribution Distribution::weibull(double shape, double mean) {
  require_positive(shape, "weibull shape");
  require_positive(mean, "weibull mean");
  return Distribution(Kind::weibull, mean / std::tgamma(1.0 + 1.0 / shape),
                      shape);
}

Distribution Distribution::weibull_from_cv2(double cv2, double mean) {
  require_positive(cv2, "weibull cv2");
  // cv2 decreases in the shape; bracket roughly covers cv2 in [1e-4, 1e20].
  double lo = 0.04, hi = 100.0;
  if (cv2 > weibull_cv2(lo) || cv2 < weibull_cv2(hi)) {
    throw std::invalid_argument("weibull cv2 outside supported range");
  }
  auto f = [cv2](double log_shape) {
    return std::log1p(weibull_cv2(std::exp(log_shape))) - std::log1p(cv2);
  };
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(
      f, std::log(lo), std::log(hi),
      boost::math::tools::eps_tolerance<double>(50), iters);
  return weibull(std::exp(0.5 * (r.first + r.second)), mean);
}

double Distribution::cv2() const {
  if (kind_ == Kind::deterministic) return 0.0;
  if (kind_ == Kind::exponential) return 1.0;
  return weibull_cv2(shape_);
}

double Distribution::raw_moment(int order) const {
  if (order < 0) throw std::invalid_argument("moment order must be >= 0");
  switch (kind_) {
    case Kind::deterministic:
      return std::pow(scale_, order);
    case Kind::exponential:
      return std::tgamma(order + 1.0) * std::pow(scale_, order);
    case Kind::weibull:
      return std::pow(scale_, order) * std::tgamma(1.0 + order / shape_);
  }
  return 0.0;
}

double Distribution::cdf(double x) const {
  if (kind_ == Kind::deterministic) return x >= scale_ ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  return -std::expm1(-cumulative_hazard(x));
}

double Distribution::survival(double x) const {
  if (kind_ == Kind::deterministic) return x >= scale_ ? 0.0 : 1.0;
  if (x <= 0.0) return 1.0;
  return std::exp(-cumulative_hazard(x));
}

double Distribution::pdf(double x) const {
  if (kind_ == Kind::deterministic || x < 0.0) return 0.0;
  if (x == 0.0) {
    if (shape_ < 1.0) return kInf;
    return shape_ == 1.0 ? 1.0 / scale_ : 0.0;
  }
  double z = x / scale_;
  return shape_ / scale_ * std::pow(z, shape_ - 1.0) *
         std::exp(-std::pow(z, shape_));
}

double Distribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile p outside [0,1]");
  if (kind_ == Kind::deterministic) return scale_;
  return size_at_hazard(-std::log1p(-p));
}

double Distribution::cumulative_hazard(double x) const {
  if (atomic()) throw std::invalid_argument("cumulative hazard of an atomic law");
  if (x <= 0.0) return 0.0;
  if (x == kInf) return kInf;
  return kind_ == Kind::exponential ? x / scale_ : std::pow(x / scale_, shape_);
}

double Distribution::size_at_hazard(double u) const {
  if (atomic()) throw std::invalid_argument("hazard inverse of an atomic law");
  if (u <= 0.0) return 0.0;
  return kind_ == Kind::exponential ? scale_ * u
                                    : scale_ * std::pow(u, 1.0 / shape_);
}

double Distribution::sample(Rng& rng) const {
  if (kind_ == Kind::deterministic) return scale_;
  return size_at_hazard(-std::log(rng.uniform()));
}

Distribution Distribution::scaled(double factor) const {
  require_positive(factor, "scale factor");
  Distribution d = *this;
  d.scale_ *= factor;
  return d;
}

std::string Distribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::deterministic:
      os << "deterministic(" << scale_ << ")";
      break;
    case Kind::exponential:
      os << "exponential(mean=" << scale_ << ")";
      break;
    case Kind::weibull:
      os << "weibull(shape=" << shape_ << ",mean=" << mean() << ")";
      break;
  }
  return os.str();
}

double truncated_moment(const Distribution& d, int order, double x) {
  if (d.atomic()) {
    throw std::invalid_argument("truncated moments need a nonatomic law");
  }
  if (order < 0) throw std::invalid_argument("moment order must be >= 0");
  if (!(x >= 0.0)) throw std::invalid_argument("truncated moment at negative x");
  if (x == 0.0) return 0.0;
  if (order == 0) return d.cdf(x);
  // int_0^x t^i f(t) dt = scale^i Gamma(1 + i/k) P(1 + i/k, H(x))
  double a = 1.0 + order / d.shape();
  return std::pow(d.scale(), order) * std::tgamma(a) *
         boost::math::gamma_p(a, d.cumulative_hazard(x));
}

double analysis_cutoff(const Distribution& d) { return d.quantile(1.0 - 1e-12); }

// ---------------------------------------------------------------------------

BatchWidthLaw BatchWidthLaw::deterministic(long width) {
  if (width < 1) throw std::invalid_argument("deterministic width must be >= 1");
  BatchWidthLaw l;
  l.kind_ = Kind::deterministic;
  l.lo_ = l.hi_ = width;
  return l;
}

BatchWidthLaw BatchWidthLaw::geometric_from_1(double mean) {
  if (!(mean >= 1.0)) throw std::invalid_argument("geometric-from-1 mean must be >= 1");
  BatchWidthLaw l;
  l.kind_ = Kind::geometric_from_1;
  l.comp_[0] = {1.0, 1.0 / mean};
  l.comp_[1] = {0.0, 1.0};
  return l;
}

BatchWidthLaw BatchWidthLaw::geometric_from_0(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("geometric-from-0 mean must be > 0");
  BatchWidthLaw l;
  l.kind_ = Kind::geometric_from_0;
  l.mean_ = mean;
  return l;
}

BatchWidthLaw BatchWidthLaw::two_point(long lo, long hi, double p_hi) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("two-point needs 1 <= lo <= hi");
  if (!(p_hi >= 0.0 && p_hi <= 1.0)) throw std::invalid_argument("two-point p_hi outside [0,1]");
  BatchWidthLaw l;
  l.kind_ = Kind::two_point;
  l.lo_ = lo;
  l.hi_ = hi;
  l.p_hi_ = p_hi;
  return l;
}

BatchWidthLaw BatchWidthLaw::hyper_geometric(double mean, double cv2) {
  if (!(mean > 1.0) || !(cv2 > 0.0)) {
    throw std::invalid_argument("hyper-geometric needs mean > 1 and cv2 > 0");
  }
  // Balanced means: w_j m_j = mean / 2. A geometric-from-1 component of
  // mean m has E[B^2] = 2 m^2 - m, which fixes m_1 + m_2 and m_1 m_2.
  double sum = (1.0 + cv2) * mean + 1.0;
  double prod = 0.5 * mean * sum;
  double disc = sum * sum - 4.0 * prod;
  if (disc < 0.0) throw std::invalid_argument("hyper-geometric moments infeasible");
  double m1 = 0.5 * (sum - std::sqrt(disc));
  double m2 = 0.5 * (sum + std::sqrt(disc));
  if (m1 < 1.0) throw std::invalid_argument("hyper-geometric cv2 too small for mean");
  BatchWidthLaw l;
  l.kind_ = Kind::hyper_geometric;
  l.comp_[0] = {0.5 * mean / m1, 1.0 / m1};
  l.comp_[1] = {0.5 * mean / m2, 1.0 / m2};
  return l;
}

BatchWidthLaw BatchWidthLaw::from_moments(double mean, double cv2) {
  if (cv2 == 0.0) {
    long w = std::lround(mean);
    if (std::abs(mean - static_cast<double>(w)) > 1e-12) {
      throw std::invalid_argument("deterministic width must be an integer");
    }
    return deterministic(w);
  }
  return hyper_geometric(mean, cv2);
}

double BatchWidthLaw::pmf(long b) const {
  switch (kind_) {
    case Kind::deterministic:
      return b == lo_ ? 1.0 : 0.0;
    case Kind::two_point:
      if (lo_ == hi_) return b == lo_ ? 1.0 : 0.0;
      if (b == lo_) return 1.0 - p_hi_;
      return b == hi_ ? p_hi_ : 0.0;
    case Kind::geometric_from_0: {
      if (b < 0) return 0.0;
      double a = mean_ / (1.0 + mean_);
      return std::pow(a, static_cast<double>(b)) / (1.0 + mean_);
    }
    case Kind::geometric_from_1:
    case Kind::hyper_geometric: {
      if (b < 1) return 0.0;
      double s = 0.0;
      for (const auto& c : comp_) {
        if (c.weight == 0.0) continue;
        s += c.weight * c.p * std::pow(1.0 - c.p, static_cast<double>(b - 1));
      }
      return s;
    }
  }
  return 0.0;
}

long BatchWidthLaw::min_width() const {
  switch (kind_) {
    case Kind::deterministic:
    case Kind::two_point:
      return lo_;
    case Kind::geometric_from_0:
      return 0;
    default:
      return 1;
  }
}

long BatchWidthLaw::max_width() const {
  switch (kind_) {
    case Kind::deterministic:
    case Kind::two_point:
      return hi_;
    case Kind::geometric_from_1:
      return comp_[0].p == 1.0 ? 1 : -1;
    default:
      return -1;
  }
}

double BatchWidthLaw::mean() const { return batch_expectation(*this, BatchWeight::b, 1.0); }

double BatchWidthLaw::second_moment() const {
  return batch_expectation(*this, BatchWeight::b_squared, 1.0);
}

double BatchWidthLaw::cv2() const {
  double m = mean();
  return second_moment() / (m * m) - 1.0;
}

long BatchWidthLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::deterministic:
      return lo_;
    case Kind::two_point:
      return rng.uniform() < p_hi_ ? hi_ : lo_;
    case Kind::geometric_from_0: {
      double log_a = std::log(mean_ / (1.0 + mean_));
      for (;;) {
        long b = static_cast<long>(std::floor(std::log(rng.uniform()) / log_a));
        if (b >= 1) return b;
      }
    }
    case Kind::geometric_from_1:
    case Kind::hyper_geometric: {
      const Component* c = &comp_[0];
      if (kind_ == Kind::hyper_geometric && rng.uniform() >= comp_[0].weight) {
        c = &comp_[1];
      }
      if (c->p >= 1.0) return 1;
      return 1 + static_cast<long>(
                     std::floor(std::log(rng.uniform()) / std::log1p(-c->p)));
    }
  }
  return 1;
}

std::string BatchWidthLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::deterministic:
      os << "deterministic(" << lo_ << ")";
      break;
    case Kind::two_point:
      os << "two-point(" << lo_ << "," << hi_ << ",p_hi=" << p_hi_ << ")";
      break;
    case Kind::geometric_from_0:
      os << "geometric-from-0(mean=" << mean_ << ")";
      break;
    case Kind::geometric_from_1:
      os << "geometric-from-1(mean=" << 1.0 / comp_[0].p << ")";
      break;
    case Kind::hyper_geometric:
      os << "hyper-geometric(mean=" << mean() << ",cv2=" << cv2() << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

double weight_at(BatchWeight w, long b, double u) {
  double bd = static_cast<double>(b);
  switch (w) {
    case BatchWeight::b_u_pow_b_minus_1:
      return b < 1 ? 0.0 : bd * std::pow(u, bd - 1.0);
    case BatchWeight::bb1_u_pow_b_minus_2:
      return b < 2 ? 0.0 : bd * (bd - 1.0) * std::pow(u, bd - 2.0);
    case BatchWeight::b:
      return bd;
    case BatchWeight::b_squared:
      return bd * bd;
    case BatchWeight::b_b_minus_1:
      return bd * (bd - 1.0);
  }
  return 0.0;
}

// Geometric on {1,2,...} with success probability p.
double geometric1_expectation(double p, BatchWeight w, double u) {
  double q = 1.0 - p;
  switch (w) {
    case BatchWeight::b_u_pow_b_minus_1: {
      double d = 1.0 - q * u;
      return p / (d * d);
    }
    case BatchWeight::bb1_u_pow_b_minus_2: {
      double d = 1.0 - q * u;
      return 2.0 * p * q / (d * d * d);
    }
    case BatchWeight::b:
      return 1.0 / p;
    case BatchWeight::b_squared:
      return (2.0 - p) / (p * p);
    case BatchWeight::b_b_minus_1:
      return 2.0 * q / (p * p);
  }
  return 0.0;
}

// Geometric on {0,1,2,...} with mean beta.
double geometric0_expectation(double beta, BatchWeight w, double u) {
  double d = 1.0 + beta - beta * u;
  switch (w) {
    case BatchWeight::b_u_pow_b_minus_1:
      return beta / (d * d);
    case BatchWeight::bb1_u_pow_b_minus_2:
      return 2.0 * beta * beta / (d * d * d);
    case BatchWeight::b:
      return beta;
    case BatchWeight::b_squared:
      return 2.0 * beta * beta + beta;
    case BatchWeight::b_b_minus_1:
      return 2.0 * beta * beta;
  }
  return 0.0;
}

}  // namespace

double batch_expectation(const BatchWidthLaw& law, BatchWeight weight, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u outside [0,1]");
  switch (law.kind()) {
    case BatchWidthLaw::Kind::geometric_from_0:
      return geometric0_expectation(law.mean_, weight, u);
    case BatchWidthLaw::Kind::geometric_from_1:
    case BatchWidthLaw::Kind::hyper_geometric: {
      double s = 0.0;
      for (int j = 0; j < 2; ++j) {
        const auto& c = law.components()[j];
        if (c.weight == 0.0) continue;
        s += c.weight * geometric1_expectation(c.p, weight, u);
      }
      return s;
    }
    default:
      return batch_expectation_series(law, weight, u);
  }
}

double batch_expectation_series(const BatchWidthLaw& law, BatchWeight weight,
                                double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u outside [0,1]");
  const long max_b = law.max_width();
  constexpr long kCap = 100'000'000;
  double sum = 0.0;
  double prev = 0.0;
  for (long b = law.min_width(); max_b < 0 || b <= max_b; ++b) {
    if (b - law.min_width() > kCap) {
      throw std::runtime_error("batch expectation series did not converge");
    }
    double p = law.pmf(b);
    double term = p == 0.0 ? 0.0 : p * weight_at(weight, b, u);
    sum += term;
    if (max_b < 0 && prev > 0.0 && term < prev) {
      double r = term / prev;
      double tail = term * r / (1.0 - r);
      if (tail <= 1e-12 * std::abs(sum)) break;
    }
    prev = term;
  }
  return sum;
}

}  // namespace qsched
