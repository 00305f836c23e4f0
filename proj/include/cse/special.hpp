#pragma once

namespace cse {

double normal_pdf(double x);
double normal_cdf(double x);
// 1 - Phi(x) without cancellation in the upper tail.
double normal_sf(double x);
// Inverse of Phi on (0, 1); Wichura's AS241 (PPND16), ~1e-16 relative.
double normal_quantile(double p);

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double ibeta(double a, double b, double x);

enum class Rounding { down, up };

/*
 * p-quantile of Beta(a, b) by bisection on ibeta to absolute width `tol`.
 * `Rounding::up` returns the upper end of the final bracket, so the
 * result never falls below the exact quantile by more than ibeta's own
 * evaluation error; `down` returns the lower end.
 */
double beta_quantile(double p, double a, double b, Rounding rounding, double tol = 1e-12);

double sigmoid(double x);
// log(1 + e^x), stable for large |x|.
double softplus(double x);
// softplus(x + h) - softplus(x), accurate when h is small.
double softplus_increment(double x, double h);

}  // namespace cse
