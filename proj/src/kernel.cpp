#include "erasurenum/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace erasurenum {

namespace {

void check_point(const ChannelPoint& pt) {
  if (!(pt.rate > 0.0 && pt.rate < 1.0)) throw std::domain_error("rate must be in (0,1)");
  if (!(pt.erasure > 0.0 && pt.erasure < 1.0)) throw std::domain_error("erasure must be in (0,1)");
  if (pt.deadline < 1) throw std::domain_error("deadline must be >= 1");
}

}  // namespace

SpreadVector optimal_phi(int deadline) {
  if (deadline < 1) throw std::domain_error("deadline must be >= 1");
  return SpreadVector::Constant(deadline, 1.0 / deadline);
}

double chernoff_bound(const SpreadVector& phi, const ChannelPoint& pt, double theta) {
  check_point(pt);
  if (phi.size() != pt.deadline)
    throw std::invalid_argument("spread vector length does not match deadline");
  if (!(theta > 0.0)) throw std::domain_error("theta must be > 0");
  const double beta = pt.erasure;
  // ln(1 - beta + beta e^{t}) = t + ln(beta + (1-beta) e^{-t}) keeps the
  // argument bounded for large t.
  double log_mgf_sum = 0.0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double t = theta * phi[i];
    if (t > 30.0)
      log_mgf_sum += t + std::log(beta + (1.0 - beta) * std::exp(-t));
    else
      log_mgf_sum += std::log(1.0 - beta + beta * std::exp(t));
  }
  const double exponent = theta * (1.0 - pt.rate) - log_mgf_sum;
  return std::exp(-exponent);
}

double optimal_theta(const ChannelPoint& pt) {
  check_point(pt);
  if (!(pt.rate < 1.0 - pt.erasure))
    throw std::domain_error("optimal_theta requires r < 1 - beta");
  const double r = pt.rate, beta = pt.erasure;
  return pt.deadline * (std::log((1.0 - r) / beta) - std::log(r / (1.0 - beta)));
}

double kl_bernoulli(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("kl_bernoulli: a must be in [0,1]");
  if (!(b > 0.0 && b < 1.0)) throw std::domain_error("kl_bernoulli: b must be in (0,1)");
  double kl = 0.0;
  if (a > 0.0) kl += a * std::log(a / b);
  if (a < 1.0) kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return kl;
}

double error_at_optimum(const ChannelPoint& pt) {
  check_point(pt);
  return std::exp(-pt.deadline * kl_bernoulli(1.0 - pt.rate, pt.erasure));
}

ErrorDerivatives error_derivatives(const ChannelPoint& pt) {
  const double theta = optimal_theta(pt);
  const double e = error_at_optimum(pt);
  const double r = pt.rate;
  return {e * theta, e * (theta * theta - pt.deadline / (r * (1.0 - r)))};
}

double convexity_margin(double rate, double rate_max, double erasure, int deadline) {
  if (!(rate > 0.0 && rate < 1.0)) throw std::domain_error("rate must be in (0,1)");
  if (!(rate_max > 0.0 && rate_max < 1.0)) throw std::domain_error("rate_max must be in (0,1)");
  if (!(erasure > 0.0 && erasure < 1.0)) throw std::domain_error("erasure must be in (0,1)");
  if (deadline < 1) throw std::domain_error("deadline must be >= 1");
  const double a =
      std::log(((1.0 - rate_max) / rate_max) * ((1.0 - erasure) / erasure));
  return std::sqrt(static_cast<double>(deadline)) / std::sqrt(rate * (1.0 - rate)) - a;
}

}  // namespace erasurenum
