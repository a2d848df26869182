#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lgspdc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// `panels` equal sub-intervals of [a, b], each with an `order`-point Gauss–Legendre rule.
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

/// n-point Gauss–Laguerre rule for ∫_0^∞ f(x) dx. The returned weights already
/// include the e^{x} factor, i.e. ∫ f ≈ Σ w_k f(x_k).
QuadratureRule gauss_laguerre(int n);

/// Polynomial interpolant through Chebyshev points of the second kind on [a, b].
class ChebyshevInterpolant {
public:
    ChebyshevInterpolant(int n, double a, double b);

    int size() const { return static_cast<int>(nodes_.size()); }
    std::span<const double> nodes() const { return nodes_; }

    /// Lagrange basis values l_j(x) for all nodes j, written to `out`.
    void basis(double x, std::span<double> out) const;

    /// Chebyshev expansion coefficients of the interpolant through `samples`.
    std::vector<std::complex<double>> coefficients(
        std::span<const std::complex<double>> samples) const;

    /// |c_{n-1}| + |c_{n-2}| relative to max |c_k|: a cheap interpolation-error proxy.
    double tail_ratio(std::span<const std::complex<double>> samples) const;

private:
    double a_, b_;
    std::vector<double> nodes_;
    std::vector<double> bary_;
};

}  // namespace lgspdc
