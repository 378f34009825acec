// Special functions needed by the kernel and the statistical tests:
// modified Bessel K_nu and exponentially scaled I_nu at integer and
// half-integer order, regularized incomplete gamma, Kolmogorov CDF.
#pragma once

namespace cpn {

/// K_nu(x) for x > 0 and nu = k/2, k >= 0 integer (pass nu as double).
/// Half-integer orders use the exact elementary forms; integer orders use
/// the ascending series (x <= 2), the cosh-integral trapezoid rule
/// (2 < x < 20), and the large-argument expansion (x >= 20).
double bessel_k(double nu, double x);

/// d/dx K_nu(x), via K_nu' = -(K_{nu-1} + K_{nu+1})/2.
double bessel_k_derivative(double nu, double x);

/// exp(-x) * I_nu(x) for x >= 0, nu = k/2. Scaled so it never overflows.
double bessel_i_scaled(double nu, double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Chi-square upper tail probability with k degrees of freedom.
double chi_square_pvalue(double statistic, int dof);

/// Kolmogorov distribution tail Q_KS(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

}  // namespace cpn
