#pragma once

#include <complex>

namespace lgspdc {

using Complex = std::complex<double>;

/// log Γ(z), analytic continuation that is real on the positive real axis with
/// the branch cut along the negative real axis (same convention as scipy's
/// loggamma). Throws PoleError at non-positive integers.
Complex ln_gamma(Complex z);

struct Hyp2f1Options {
    int max_terms = 10000;
    double tolerance = 1e-14;  // term-to-sum ratio
};

struct Hyp2f1Result {
    Complex value;
    double error = 0.0;  // attained relative error estimate
    int terms = 0;
};

/// Regularized Gauss hypergeometric function 2F1(a,b;c;z)/Γ(c) for |z| < 1.
///
/// Entire in c: for c = 0,-1,-2,... the series starts at n = 1-c instead of
/// dividing by Γ(c). Arguments with 0.5 < |z| < 1 and Re z < 1/2 go through
/// the Pfaff transformation z -> z/(z-1); the rest use the direct series.
/// Throws DomainError for |z| >= 1 and ConvergenceError when the series
/// does not settle within the iteration cap.
Hyp2f1Result hyp2f1_regularized_detailed(Complex a, Complex b, Complex c, Complex z,
                                         const Hyp2f1Options& options = {});

using ComplexExt = std::complex<long double>;

struct Hyp2f1ResultExt {
    ComplexExt value;
    double error = 0.0;
    int terms = 0;
};

/// Same function carried out in long double. 1/Γ(c) is exact for positive
/// integer c and limited to double accuracy otherwise.
Hyp2f1ResultExt hyp2f1_regularized_extended(ComplexExt a, ComplexExt b, ComplexExt c, ComplexExt z,
                                            const Hyp2f1Options& options = {});

inline Complex hyp2f1_regularized(Complex a, Complex b, Complex c, Complex z,
                                  const Hyp2f1Options& options = {}) {
    return hyp2f1_regularized_detailed(a, b, c, z, options).value;
}

}  // namespace lgspdc
