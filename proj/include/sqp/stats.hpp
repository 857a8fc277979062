#pragma once

#include <span>

namespace sqp {

/// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0, 1].
/// Continued-fraction evaluation (modified Lentz), symmetric form.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of a Student-t statistic with df degrees of freedom:
/// I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_tailed_p(double t, int df);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

/// Paired two-tailed t-test of a against b (d_i = a_i - b_i, sample sd,
/// df = n-1). Zero-variance differences degenerate to (0, 1) when the mean
/// difference is 0 and to (+/-inf, 0) otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Bonferroni correction for m comparisons: min(1, p * m).
double bonferroni(double p, int m);

}  // namespace sqp
