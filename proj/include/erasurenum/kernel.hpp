#pragma once

#include <Eigen/Core>

namespace erasurenum {

/// Bit-spreading weights phi(0..D-1): nonnegative, summing to 1.
using SpreadVector = Eigen::VectorXd;

/// One flow's operating point on its end-to-end erasure channel.
struct ChannelPoint {
  double rate = 0.0;      // r in (0,1)
  double erasure = 0.0;   // beta in (0,1)
  int deadline = 1;       // D >= 1
};

/// Equal-split spreading over `deadline` slots, the maximizer of
/// ln(1-e) over the simplex for any fixed (theta, r, beta).
SpreadVector optimal_phi(int deadline);

/// Chernoff upper bound on the decode-failure probability:
///   exp(-[theta(1-r) - sum_Delta ln(1 - beta + beta e^{theta phi(Delta)})])
/// The exponent is assembled first and exponentiated once, so large
/// theta*phi cannot overflow intermediate products. May exceed 1.
double chernoff_bound(const SpreadVector& phi, const ChannelPoint& pt, double theta);

/// Minimizing Chernoff parameter for equal-split spreading:
///   theta* = D [ln((1-r)/beta) - ln(r/(1-beta))]
/// Defined (and positive) only on the recovery region r < 1 - beta.
double optimal_theta(const ChannelPoint& pt);

/// KL divergence between Bernoulli(a) and Bernoulli(b), with 0 ln 0 := 0.
double kl_bernoulli(double a, double b);

/// Decode error at the jointly optimal (phi*, theta*):
///   e(r) = exp(-D * KL(B(1-r) || B(beta)))
double error_at_optimum(const ChannelPoint& pt);

struct ErrorDerivatives {
  double first;    // de/dr = e * theta*(r)
  double second;   // d2e/dr2 = e * [theta*^2 - D/(r(1-r))]
};

/// Analytic derivatives of error_at_optimum with respect to the rate.
/// Requires r < 1 - beta so that theta* > 0.
ErrorDerivatives error_derivatives(const ChannelPoint& pt);

/// Signed margin of the sufficient condition for convexity of e(r):
///   sqrt(D)/sqrt(r(1-r)) - ln(((1-rate_max)/rate_max) * ((1-beta)/beta))
/// e is convex on the box when the margin is <= 0.
double convexity_margin(double rate, double rate_max, double erasure, int deadline);

}  // namespace erasurenum
