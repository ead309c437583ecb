#pragma once

// Standard Normal and Student-t distribution functions.
//
// All functions are pure and thread-safe. Domain violations throw
// std::domain_error; extreme but finite arguments saturate instead.

namespace selfstart::special_fn {

/// Phi(x). Saturates to exactly 0 or 1 far in the tails.
double std_normal_cdf(double x);

/// 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x);

/// Phi^{-1}(p) for 0 < p < 1. p == 0 or p == 1 throws std::domain_error.
double std_normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1.
double incomplete_beta(double a, double b, double x);

/// CDF of the standard Student-t with `df` degrees of freedom (df may be
/// non-integer). df <= 0 throws std::domain_error.
double student_t_cdf(double x, double df);

/// P(T_df <= -|x|): the lower tail mass beyond |x|, without cancellation.
double student_t_tail(double x, double df);

/// Standard Normal score of a Student-t value: Phi^{-1}(F_df(x)).
/// Evaluated through the smaller tail so large |x| keep full precision.
double student_t_to_normal(double x, double df);

/// Log density of a location-scale Student-t, t_df(location, scale^2).
double student_t_log_pdf(double x, double df, double location, double scale);

}  // namespace selfstart::special_fn
