#include "lgspdc/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lgspdc {

namespace {

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = legendre(n, x);
            dp = d;
            const double dx = p / d;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        dp = legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
    if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be positive");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(std::size_t(panels) * order);
    rule.weights.reserve(std::size_t(panels) * order);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int k = 0; k < order; ++k) {
            rule.nodes.push_back(lo + 0.5 * h * (base.nodes[k] + 1.0));
            rule.weights.push_back(0.5 * h * base.weights[k]);
        }
    }
    return rule;
}

QuadratureRule gauss_laguerre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be positive");
    // Golub–Welsch for the nodes, then Newton polish and the closed-form weights.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jacobi(i, i) = 2.0 * i + 1.0;
        if (i + 1 < n) jacobi(i, i + 1) = jacobi(i + 1, i) = i + 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = solver.eigenvalues()(i);
        double ln_prev = 0.0;  // L_{n-1}
        for (int it = 0; it < 20; ++it) {
            double l0 = 1.0, l1 = 1.0 - x;
            for (int k = 1; k < n; ++k) {
                const double l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
                l0 = l1;
                l1 = l2;
            }
            ln_prev = l0;
            const double dl = n * (l1 - l0) / x;
            const double dx = l1 / dl;
            x -= dx;
            if (std::abs(dx) < 1e-15 * std::max(1.0, x)) break;
        }
        // w = x / (n^2 L_{n-1}(x)^2), times e^{x} for the unweighted form.
        double l0 = 1.0, l1 = 1.0 - x;
        for (int k = 1; k < n; ++k) {
            const double l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
            l0 = l1;
            l1 = l2;
        }
        ln_prev = l0;
        const double log_w = std::log(x) - 2.0 * std::log(double(n)) - 2.0 * std::log(std::abs(ln_prev));
        rule.nodes[i] = x;
        rule.weights[i] = std::exp(log_w + x);
    }
    return rule;
}

ChebyshevInterpolant::ChebyshevInterpolant(int n, double a, double b) : a_(a), b_(b) {
    if (n < 2) throw std::invalid_argument("ChebyshevInterpolant: need at least two nodes");
    nodes_.resize(n);
    bary_.resize(n);
    for (int j = 0; j < n; ++j) {
        const double t = std::cos(std::numbers::pi * j / (n - 1));
        nodes_[j] = 0.5 * (a + b) + 0.5 * (b - a) * t;
        bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    }
}

void ChebyshevInterpolant::basis(double x, std::span<double> out) const {
    const int n = size();
    for (int j = 0; j < n; ++j) {
        if (x == nodes_[j]) {
            std::fill(out.begin(), out.end(), 0.0);
            out[j] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
        out[j] = bary_[j] / (x - nodes_[j]);
        denom += out[j];
    }
    for (int j = 0; j < n; ++j) out[j] /= denom;
}

std::vector<std::complex<double>> ChebyshevInterpolant::coefficients(
    std::span<const std::complex<double>> samples) const {
    const int n = size();
    const int m = n - 1;
    std::vector<std::complex<double>> c(n);
    for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double wj = (j == 0 || j == m) ? 0.5 : 1.0;
            acc += wj * samples[j] * std::cos(std::numbers::pi * k * j / m);
        }
        c[k] = acc * (2.0 / m) * ((k == 0 || k == m) ? 0.5 : 1.0);
    }
    return c;
}

double ChebyshevInterpolant::tail_ratio(std::span<const std::complex<double>> samples) const {
    const auto c = coefficients(samples);
    double peak = 0.0;
    for (const auto& v : c) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0.0;
    const int n = size();
    return (std::abs(c[n - 1]) + std::abs(c[n - 2])) / peak;
}

}  // namespace lgspdc
