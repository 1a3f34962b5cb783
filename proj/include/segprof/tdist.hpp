#pragma once

namespace segprof {

/// Regularized incomplete beta I_x(a, b), evaluated by Lentz's continued
/// fraction. Absolute accuracy is about 1e-14 for the parameter ranges the
/// t-tests produce.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with df > 0 degrees of freedom (df need not be
/// an integer).
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace segprof
