#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hbasket {

// Dense polynomial in the monomial basis, constant term first.
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() : coeffs{0.0} {}
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        trim();
    }

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    bool is_zero() const { return coeffs.size() == 1 && coeffs[0] == 0.0; }

    double operator()(double x) const {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }

    // Keeps the invariant that the leading coefficient is nonzero.
    void trim() {
        while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    }

    Polynomial derivative() const {
        if (coeffs.size() <= 1) return Polynomial{};
        std::vector<double> d(coeffs.size() - 1);
        for (std::size_t i = 1; i < coeffs.size(); ++i)
            d[i - 1] = static_cast<double>(i) * coeffs[i];
        return Polynomial(std::move(d));
    }

    Polynomial operator*(const Polynomial& o) const {
        if (is_zero() || o.is_zero()) return Polynomial{};
        std::vector<double> r(coeffs.size() + o.coeffs.size() - 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            for (std::size_t j = 0; j < o.coeffs.size(); ++j)
                r[i + j] += coeffs[i] * o.coeffs[j];
        return Polynomial(std::move(r));
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.coeffs.size() > coeffs.size()) coeffs.resize(o.coeffs.size(), 0.0);
        for (std::size_t i = 0; i < o.coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
        trim();
        return *this;
    }

    Polynomial& operator*=(double s) {
        for (double& c : coeffs) c *= s;
        trim();
        return *this;
    }
};

// All real roots of p, ascending. Companion-matrix eigenvalues with
// imaginary parts below 1e-9 * scale treated as real, then Newton-polished.
inline std::vector<double> real_roots(const Polynomial& p) {
    std::vector<double> c = p.coeffs;
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    if (cmax == 0.0) return {};
    // Drop relatively negligible leading coefficients; they produce spurious
    // huge eigenvalues in the companion matrix.
    while (c.size() > 1 && std::abs(c.back()) < 1e-14 * cmax) c.pop_back();
    int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    if (n == 1) return {-c[0] / c[1]};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);

    Polynomial dp = p.derivative();
    std::vector<double> roots;
    for (int i = 0; i < n; ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        double scale = std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) > 1e-9 * scale) continue;
        double x = z.real();
        for (int it = 0; it < 8; ++it) {
            double f = p(x);
            double df = dp(x);
            if (df == 0.0) break;
            double step = f / df;
            x -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace hbasket
